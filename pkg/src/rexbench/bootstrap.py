"""Bootstrap rule induction from co-occurrences of extracted argument pairs.

One iteration: collect the argument-string pairs the current rules extract
(optionally widened through coreference clusters), find every sentence where
both strings of a pair occur, connect the matched spans by their shortest
dependency path, turn each path into a conjunctive rule with lexical
constraints on its interior tokens, then score and rank the deduplicated
candidates against the seed extractions.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .corpus import Corpus, is_pronoun_mention
from .executor import _argument_of, evaluate_rule
from .rules import (And, Atom, Const, Registry, Rule, Var, infer_types,
                    print_rule)

_MAX_COREF_MENTION_TOKENS = 8
_INTERIOR_NAMES = "cdefghij"


@dataclass
class BootstrapConfig:
    use_coref: bool = True
    use_entity_types: bool = False
    max_path_len: int = 4
    min_overlap: int = 1
    sort: str = "pmi"  # or "count"

    def __post_init__(self):
        if self.max_path_len < 1:
            raise ValueError("max_path_len must be at least 1")
        if self.sort not in ("pmi", "count"):
            raise ValueError("sort must be 'pmi' or 'count'")


@dataclass
class PairSet:
    pairs: set
    provenance: dict = field(default_factory=dict)  # pair -> extraction index

    def __len__(self):
        return len(self.pairs)


@dataclass
class CandidateRule:
    rule: Rule
    extraction_count: int = 0
    overlap_count: int = 0
    pmi: Optional[float] = None
    pair_strings: set = field(default_factory=set)
    matched_sentences: set = field(default_factory=set)

    @property
    def rule_text(self) -> str:
        return print_rule(self.rule, with_comment=False)

    def tsv_row(self) -> str:
        pmi = "" if self.pmi is None else f"{self.pmi:.6f}"
        return "\t".join([pmi, str(self.extraction_count),
                          str(self.overlap_count), self.rule_text])


@dataclass
class BootstrapDiagnostics:
    matches: int = 0
    skipped_no_path: int = 0
    candidates_before_filter: int = 0


def collect_pairs(relation: str, extraction_list, corpus: Corpus,
                  use_coref: bool = True) -> PairSet:
    """Argument-string pairs of existing extractions, expanded through
    coreference clusters when requested (non-pronominal mentions of at most
    eight tokens; expansions combine by cross product)."""
    pairs = set()
    provenance = {}
    for idx, extraction in enumerate(extraction_list):
        lefts = _coref_strings(corpus, extraction.arg1, extraction.arg1_span,
                               use_coref)
        rights = _coref_strings(corpus, extraction.arg2, extraction.arg2_span,
                                use_coref)
        for a in lefts:
            for b in rights:
                pair = (a, b)
                if pair not in pairs:
                    pairs.add(pair)
                    provenance[pair] = idx
    return PairSet(pairs, provenance)


def _coref_strings(corpus, surface: str, span, use_coref: bool) -> set:
    out = {surface}
    if not use_coref or span is None:
        return out
    for cluster_id in corpus.clusters_of_span(span):
        cluster = next(c for c in corpus.coref_clusters
                       if c.cluster_id == cluster_id)
        for mention in cluster.mentions:
            if mention == span:
                continue
            if mention[2] - mention[1] + 1 > _MAX_COREF_MENTION_TOKENS:
                continue
            if is_pronoun_mention(corpus, mention):
                continue
            out.add(corpus.span_surface(mention))
    return {s for s in out if s}


def find_cooccurrences(pairs: PairSet, corpus: Corpus) -> list:
    """Every (sentence_id, arg1_span, arg2_span) where both strings of some
    pair occur with non-overlapping spans.

    Candidate sentences come from intersecting per-word sentence sets
    (inverted index), then spans are verified within each candidate sentence.
    """
    out = set()
    word_sids: dict = {}
    span_cache: dict = {}

    def sids_of(words):
        acc = None
        for w in words:
            ws = word_sids.get(w)
            if ws is None:
                ws = {sid for sid, _ in corpus.word_postings(w)}
                word_sids[w] = ws
            acc = ws if acc is None else acc & ws
            if not acc:
                return acc
        return acc if acc is not None else set()

    def spans_in(s, words, sid):
        key = (s, sid)
        spans = span_cache.get(key)
        if spans is None:
            toks = corpus.sentences[sid].tokens
            k = len(words)
            spans = []
            for start in range(len(toks) - k + 1):
                if all(toks[start + i].surface == words[i] for i in range(k)):
                    spans.append((sid, start + 1, start + k))
            span_cache[key] = spans
        return spans

    for a, b in pairs.pairs:
        words_a, words_b = a.split(), b.split()
        if not words_a or not words_b:
            continue
        common = sids_of(words_a)
        if common:
            common = common & sids_of(words_b)
        for sid in common:
            for sp_a in spans_in(a, words_a, sid):
                for sp_b in spans_in(b, words_b, sid):
                    if not _overlap(sp_a, sp_b):
                        out.add((sid, sp_a, sp_b))
    return sorted(out)


def _overlap(s1, s2) -> bool:
    return not (s1[2] < s2[1] or s2[2] < s1[1])


def induce_patterns(matches, corpus: Corpus, config: BootstrapConfig,
                    relation: str = "candidate",
                    diagnostics: Optional[BootstrapDiagnostics] = None):
    """Candidate rules from dependency paths between matched span heads.

    The emitted body is the path's dependency atoms (labels keep their
    direction) plus a lexical ``token`` constraint on every interior path
    node, plus entity-type atoms on the endpoints when configured.  Duplicate
    patterns merge; matches without a path within ``max_path_len`` edges are
    skipped and counted.
    """
    if diagnostics is None:
        diagnostics = BootstrapDiagnostics()
    candidates = {}
    for sid, span1, span2 in matches:
        diagnostics.matches += 1
        head1 = corpus.head_of_span(span1)
        head2 = corpus.head_of_span(span2)
        path = _shortest_path(corpus, sid, head1, head2, config.max_path_len)
        if path is None:
            diagnostics.skipped_no_path += 1
            continue
        rule = _path_rule(corpus, relation, head1, head2, path,
                          config.use_entity_types)
        if rule is None:
            diagnostics.skipped_no_path += 1
            continue
        key = print_rule(rule, with_comment=False)
        entry = candidates.get(key)
        if entry is None:
            entry = CandidateRule(rule)
            candidates[key] = entry
        entry.matched_sentences.add(sid)
    diagnostics.candidates_before_filter = len(candidates)
    return [candidates[k] for k in sorted(candidates)]


def _shortest_path(corpus, sid, start, goal, max_len):
    """BFS over the sentence's dependency edges, treated as undirected;
    returns [(head_pos, dep_pos, label), ...] along the path or None."""
    if start == goal:
        return None
    adjacency = {}
    for edge in corpus.edges_of_sentence(sid):
        adjacency.setdefault(edge.head, []).append(
            (edge.dependent, (edge.head, edge.dependent, edge.label)))
        adjacency.setdefault(edge.dependent, []).append(
            (edge.head, (edge.head, edge.dependent, edge.label)))
    for nbrs in adjacency.values():
        nbrs.sort(key=lambda item: item[0])
    seen = {start}
    queue = deque([(start, [])])
    while queue:
        node, path = queue.popleft()
        if len(path) >= max_len:
            continue
        for nxt, edge in adjacency.get(node, ()):
            if nxt in seen:
                continue
            new_path = path + [edge]
            if nxt == goal:
                return new_path
            seen.add(nxt)
            queue.append((nxt, new_path))
    return None


def _path_rule(corpus, relation, head1, head2, path, use_entity_types):
    names = {head1: "a", head2: "b"}
    order = [head1]
    for h, d, _ in path:
        for node in (h, d):
            if node not in names:
                idx = len(names) - 2
                if idx >= len(_INTERIOR_NAMES):
                    return None
                names[node] = _INTERIOR_NAMES[idx]
                order.append(node)
    atoms = []
    for h, d, label in path:
        atoms.append(Atom(label, (Var(names[h]), Var(names[d]))))
    for node, var in names.items():
        if var in ("a", "b"):
            continue
        tok = corpus.token_at(node)
        atoms.append(Atom("token", (Var(var), Const(tok.surface))))
    if use_entity_types:
        for node, var in ((head1, "a"), (head2, "b")):
            mention = corpus.mention_at_head(node)
            if mention is not None:
                atoms.append(Atom(mention.etype, (Var(var),)))
    return Rule(Atom(relation, (Var("a"), Var("b"))), And(tuple(atoms)))


def evaluate_candidates(candidates, corpus: Corpus, registry: Registry):
    """Run every candidate over the corpus, recording its extracted string
    pairs (mention-level, like the extraction pipeline)."""
    for cand in candidates:
        reg = registry.clone()
        reg.register_derived(cand.rule.head.pred, 2)
        rows = evaluate_rule(cand.rule, reg, corpus, {}, stats=corpus.stats())
        pair_strings = set()
        for row in rows:
            a, _ = _argument_of(corpus, row[0])
            b, _ = _argument_of(corpus, row[1])
            pair_strings.add((a, b))
        cand.extraction_count = len(rows)
        cand.pair_strings = pair_strings
    return candidates


def rank_candidates(candidates, seed_pairs: PairSet, config: BootstrapConfig,
                    exclude_rule_ids: Iterable[str] = ()) -> list:
    """Score candidates against the seed pair set and sort.

    pmi = log(overlap * N / (|E_s| * |E_R|)) over the universe N of all
    candidate pairs plus the seed pairs; candidates under ``min_overlap``
    are dropped, as are rules already in the seed rule set.
    """
    exclude = set(exclude_rule_ids)
    universe = set(seed_pairs.pairs)
    for cand in candidates:
        universe |= cand.pair_strings
    n_univ = len(universe)
    seed_size = len(seed_pairs.pairs)
    kept = []
    for cand in candidates:
        if cand.rule.rule_id in exclude:
            continue
        overlap = len(cand.pair_strings & seed_pairs.pairs)
        cand.overlap_count = overlap
        if overlap < config.min_overlap:
            continue
        if overlap >= 1 and cand.pair_strings and seed_size:
            cand.pmi = math.log(
                (overlap * n_univ) / (len(cand.pair_strings) * seed_size))
        else:
            cand.pmi = None
        kept.append(cand)
    if config.sort == "pmi":
        kept.sort(key=lambda c: (-(c.pmi if c.pmi is not None else -math.inf),
                                 -c.extraction_count, c.rule_text))
    else:
        kept.sort(key=lambda c: (-c.extraction_count,
                                 -(c.pmi if c.pmi is not None else -math.inf),
                                 c.rule_text))
    return kept


def iterate(relation: str, extraction_list, corpus: Corpus,
            registry: Registry, config: Optional[BootstrapConfig] = None,
            exclude_rule_ids: Iterable[str] = ()):
    """One full bootstrap iteration for a relation; returns the ranked
    candidate list and diagnostics."""
    config = config or BootstrapConfig()
    diagnostics = BootstrapDiagnostics()
    pairs = collect_pairs(relation, extraction_list, corpus, config.use_coref)
    if not pairs.pairs:
        return [], diagnostics
    matches = find_cooccurrences(pairs, corpus)
    candidates = induce_patterns(matches, corpus, config, relation=relation,
                                 diagnostics=diagnostics)
    evaluate_candidates(candidates, corpus, registry)
    ranked = rank_candidates(candidates, pairs, config,
                             exclude_rule_ids=exclude_rule_ids)
    return ranked, diagnostics


def candidates_tsv(candidates) -> str:
    return "\n".join(c.tsv_row() for c in candidates) + (
        "\n" if candidates else "")


def induce_from_click(corpus: Corpus, registry: Registry, sentence_id: int,
                      arg1_offset: int, arg2_offset: int,
                      config: Optional[BootstrapConfig] = None,
                      relation: str = "candidate") -> list:
    """Candidates for a user-clicked argument pair: offsets widen to their
    covering entity mentions when present, then go through the ordinary path
    generator and evaluation."""
    config = config or BootstrapConfig()
    spans = []
    for off in (arg1_offset, arg2_offset):
        pos = (sentence_id, off)
        if corpus.token_at(pos) is None:
            raise ValueError(f"no token at offset {off} in sentence "
                             f"{sentence_id}")
        mention = corpus.mention_at_head(pos)
        spans.append(mention.span if mention is not None
                     else (sentence_id, off, off))
    matches = [(sentence_id, spans[0], spans[1])]
    candidates = induce_patterns(matches, corpus, config, relation=relation)
    evaluate_candidates(candidates, corpus, registry)
    candidates.sort(key=lambda c: (-c.extraction_count, c.rule_text))
    return candidates
