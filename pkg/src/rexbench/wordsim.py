"""Distributional keyword suggestions: PPMI vectors over sentence
co-occurrence, cosine neighbors and prefix completions.

Counts are per sentence and binary: ``n(w,v)`` is the number of sentences
containing both words.  Over the symmetric co-occurrence matrix with row
marginals ``row(w)`` and grand total ``T``, the weight of context v for word
w is ``max(0, log(n(w,v) * T / (row(w) * row(v))))``; the word itself and
stopwords (the most frequent 0.1% of the vocabulary) carry no weight.  All
iteration is over sorted keys, so rebuilding the table on the same corpus is
bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .corpus import Corpus


@dataclass
class ContextVector:
    word: str
    weights: dict
    norm: float


@dataclass
class Suggestion:
    word: str
    score: float
    occurrences: int
    kind: str = "similar"  # or "prefix"


class VectorTable:
    def __init__(self, vectors: dict, stopwords: set, min_count: int,
                 occurrence_counts: dict):
        self.vectors = vectors
        self.stopwords = stopwords
        self.min_count = min_count
        self.occurrences = occurrence_counts
        self._context_index: Optional[dict] = None

    def __contains__(self, word):
        return word in self.vectors

    def vector(self, word: str) -> Optional[ContextVector]:
        return self.vectors.get(word)

    def cosine(self, w1: str, w2: str) -> float:
        v1, v2 = self.vectors.get(w1), self.vectors.get(w2)
        if v1 is None or v2 is None:
            return 0.0
        if w1 == w2:
            return 1.0 if v1.norm > 0 else 0.0
        if v1.norm == 0 or v2.norm == 0:
            return 0.0
        small, big = (v1, v2) if len(v1.weights) <= len(v2.weights) else (v2, v1)
        dot = 0.0
        for ctx in sorted(small.weights):
            other = big.weights.get(ctx)
            if other is not None:
                dot += small.weights[ctx] * other
        return dot / (v1.norm * v2.norm)

    def context_index(self) -> dict:
        """context word -> sorted list of vocabulary words weighting it."""
        if self._context_index is None:
            index: dict = {}
            for word in sorted(self.vectors):
                for ctx in self.vectors[word].weights:
                    index.setdefault(ctx, []).append(word)
            self._context_index = index
        return self._context_index


def build_vectors(corpus: Corpus, min_count: int = 5) -> VectorTable:
    """One PPMI context vector per vocabulary word with at least
    ``min_count`` token occurrences."""
    occurrence_counts: dict = {}
    for tok in corpus.iter_tokens():
        occurrence_counts[tok.surface] = occurrence_counts.get(tok.surface, 0) + 1

    stopwords = _stopwords(occurrence_counts)
    vocab = sorted(w for w, c in occurrence_counts.items() if c >= min_count)
    eligible = set(vocab)

    pair_counts: dict = {}
    row_totals: dict = {}
    grand_total = 0
    for sent in corpus.sentences:
        words = sorted({t.surface for t in sent.tokens} & eligible)
        for i, w in enumerate(words):
            for v in words[i + 1:]:
                pair_counts[(w, v)] = pair_counts.get((w, v), 0) + 1
                row_totals[w] = row_totals.get(w, 0) + 1
                row_totals[v] = row_totals.get(v, 0) + 1
                grand_total += 2

    weights_by_word: dict = {w: {} for w in vocab}
    for (w, v), n_wv in sorted(pair_counts.items()):
        value = math.log(
            n_wv * grand_total / (row_totals[w] * row_totals[v]))
        if value <= 0:
            continue
        if v not in stopwords:
            weights_by_word[w][v] = value
        if w not in stopwords:
            weights_by_word[v][w] = value

    vectors = {}
    for w in vocab:
        weights = weights_by_word[w]
        norm = math.sqrt(sum(x * x for x in
                             (weights[k] for k in sorted(weights))))
        vectors[w] = ContextVector(w, weights, norm)
    return VectorTable(vectors, stopwords, min_count, occurrence_counts)


def _stopwords(occurrence_counts: dict) -> set:
    k = int(len(occurrence_counts) * 0.001)
    if k <= 0:
        return set()
    ranked = sorted(occurrence_counts.items(), key=lambda item: (-item[1],
                                                                 item[0]))
    return {w for w, _ in ranked[:k]}


def similar_words(seed: str, k: int, table: VectorTable) -> list:
    """Top-k cosine neighbors of the seed, the seed excluded; ties break by
    occurrence count, then lexicographically.  Out-of-vocabulary seeds get an
    empty list."""
    seed_vec = table.vector(seed)
    if seed_vec is None or seed_vec.norm == 0:
        return []
    candidates = set()
    index = table.context_index()
    for ctx in seed_vec.weights:
        candidates.update(index.get(ctx, ()))
    candidates.discard(seed)
    scored = []
    for word in sorted(candidates):
        score = table.cosine(seed, word)
        if score > 0:
            scored.append(Suggestion(word, score,
                                     table.occurrences.get(word, 0)))
    scored.sort(key=lambda s: (-s.score, -s.occurrences, s.word))
    return scored[:k]


def prefix_words(seed: str, table: VectorTable) -> list:
    """Vocabulary words with the seed as strict prefix, by occurrences."""
    if not seed:
        raise ValueError("prefix seed must be non-empty")
    out = []
    for word in table.vectors:
        if word != seed and word.startswith(seed):
            out.append(Suggestion(word, 0.0, table.occurrences.get(word, 0),
                                  kind="prefix"))
    out.sort(key=lambda s: (-s.occurrences, s.word))
    return out


def serialize_table(table: VectorTable) -> str:
    """Deterministic TSV: header, then word, context, weight rows."""
    lines = [f"# wordsim-v1\tmin_count={table.min_count}"]
    for w in sorted(table.vectors):
        vec = table.vectors[w]
        for ctx in sorted(vec.weights):
            lines.append(f"{w}\t{ctx}\t{vec.weights[ctx]!r}")
    return "\n".join(lines) + "\n"


def deserialize_table(text: str, corpus: Corpus) -> VectorTable:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# wordsim-v1"):
        raise ValueError("not a wordsim table")
    min_count = int(lines[0].split("min_count=")[1])
    occurrence_counts: dict = {}
    for tok in corpus.iter_tokens():
        occurrence_counts[tok.surface] = occurrence_counts.get(tok.surface, 0) + 1
    weights_by_word: dict = {}
    for line in lines[1:]:
        if not line.strip():
            continue
        w, ctx, weight = line.split("\t")
        weights_by_word.setdefault(w, {})[ctx] = float(weight)
    vocab = sorted(w for w, c in occurrence_counts.items() if c >= min_count)
    vectors = {}
    for w in vocab:
        weights = weights_by_word.get(w, {})
        norm = math.sqrt(sum(x * x for x in
                             (weights[k] for k in sorted(weights))))
        vectors[w] = ContextVector(w, weights, norm)
    return VectorTable(vectors, _stopwords(occurrence_counts), min_count,
                       occurrence_counts)
