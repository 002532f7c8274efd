"""Immutable annotated-corpus store with word, dependency and entity indices.

A corpus is parsed once from a line-oriented annotation file (or assembled
through :class:`CorpusBuilder`), indexed with :func:`build_indices`, and then
shared read-only by every other component.  Token positions are
``(sentence_id, offset)`` pairs with 1-based offsets; spans are
``(sentence_id, start, end)`` with inclusive ends.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

Pos = tuple  # (sentence_id, offset)
Span = tuple  # (sentence_id, start, end)


class CorpusFormatError(ValueError):
    """Raised for malformed or inconsistent corpus input."""

    def __init__(self, message: str, line_no: Optional[int] = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


def canonical_label(label: str) -> str:
    """Map dependency labels to the predicate namespace (`prep-of` -> `prep_of`)."""
    return label.replace("-", "_")


@dataclass(frozen=True, slots=True)
class Token:
    pos: Pos
    surface: str
    lemma: str
    tag: str


@dataclass(frozen=True, slots=True)
class DepEdge:
    head: Pos
    dependent: Pos
    label: str


@dataclass(frozen=True, slots=True)
class EntityMention:
    span: Span
    etype: str
    source: str = "ner-file"  # or "gazetteer"


@dataclass(frozen=True)
class CorefCluster:
    cluster_id: int
    mentions: frozenset
    representative: Span


@dataclass
class Sentence:
    sentence_id: int
    doc_id: str
    tokens: list

    def __len__(self) -> int:
        return len(self.tokens)

    def text(self) -> str:
        return " ".join(t.surface for t in self.tokens)


# POS tag sets used by the gazetteer chunker.
_PROPER_TAGS = {"NNP", "NNPS"}
_CHUNK_FILLER_TAGS = {"DT", "IN"}
_PRONOUN_TAGS = {"PRP", "PRP$", "WP", "WP$"}
_PRONOUN_WORDS = {
    "he", "she", "it", "they", "him", "her", "them", "his", "hers", "its",
    "their", "theirs", "who", "whom", "which", "that", "i", "we", "you",
    "me", "us", "myself", "himself", "herself", "itself", "themselves",
}


class Corpus:
    """Documents, sentences, annotations and the indices over them.

    Instances are mutated only by :class:`CorpusBuilder`, gazetteer
    registration and :func:`build_indices`; afterwards they are frozen and
    any further mutation attempt raises.
    """

    def __init__(self):
        self.sentences: list[Sentence] = []
        self.doc_ids: list[str] = []
        self.dep_edges: list[DepEdge] = []
        self.entity_mentions: list[EntityMention] = []
        self.coref_clusters: list[CorefCluster] = []
        self.indexed = False
        self._frozen = False
        # Indices, populated by build_indices.
        self._word_index: dict = {}
        self._lword_index: dict = {}
        self._dep_by_label: dict = {}
        self._dep_head_index: dict = {}
        self._dep_dep_index: dict = {}
        self._governors: dict = {}
        self._edge_heads: set = set()
        self._edges_by_sentence: dict = {}
        self._entity_by_type: dict = {}
        self._entity_heads: dict = {}
        self._head_mention: dict = {}
        self._capitalized: list = []
        self._cluster_of_span: dict = {}
        self._coref_pairs: list = []
        self._cluster_rows: list = []

    # -- construction-time guards ------------------------------------------

    def _check_mutable(self):
        if self._frozen:
            raise RuntimeError("corpus is immutable after build_indices")

    def _check_indexed(self):
        if not self.indexed:
            raise RuntimeError("corpus indices not built; call build_indices first")

    # -- basic accessors ----------------------------------------------------

    @property
    def sentence_count(self) -> int:
        return len(self.sentences)

    @property
    def token_count(self) -> int:
        return sum(len(s) for s in self.sentences)

    def sentence(self, sentence_id: int) -> Sentence:
        return self.sentences[sentence_id]

    def token_at(self, pos: Pos) -> Optional[Token]:
        sid, off = pos
        if 0 <= sid < len(self.sentences):
            toks = self.sentences[sid].tokens
            if 1 <= off <= len(toks):
                return toks[off - 1]
        return None

    def iter_tokens(self) -> Iterator[Token]:
        for sent in self.sentences:
            yield from sent.tokens

    def span_surface(self, span: Span) -> str:
        sid, start, end = span
        toks = self.sentences[sid].tokens
        return " ".join(t.surface for t in toks[start - 1:end])

    def iter_spans(self) -> Iterator[Span]:
        """All contiguous within-sentence spans (the active domain of Span)."""
        for sent in self.sentences:
            n = len(sent)
            for start in range(1, n + 1):
                for end in range(start, n + 1):
                    yield (sent.sentence_id, start, end)

    def dep_labels(self) -> list:
        return sorted(self._dep_by_label) if self.indexed else sorted(
            {canonical_label(e.label) for e in self.dep_edges})

    def entity_types(self) -> list:
        return sorted({m.etype for m in self.entity_mentions})

    def head_of_span(self, span: Span) -> Pos:
        """Head token of a span: the unique attached token with no governor
        inside the span, falling back to the last token when that is
        ambiguous.  Tokens outside the dependency graph entirely (stranded
        prepositions under collapsed edges, punctuation) never head a span.
        """
        sid, start, end = span
        candidates = []
        for off in range(start, end + 1):
            pos = (sid, off)
            gov = self._governors.get(pos)
            if gov is not None and start <= gov[1] <= end:
                continue
            if gov is None and pos not in self._edge_heads:
                continue  # isolated token
            candidates.append(pos)
        if len(candidates) == 1:
            return candidates[0]
        return (sid, end)

    def mention_at_head(self, pos: Pos, etype: Optional[str] = None) -> Optional[EntityMention]:
        if etype is None:
            return self._head_mention.get(pos)
        return self._entity_heads.get(etype, {}).get(pos)

    def entity_head_positions(self, etype: str) -> dict:
        return self._entity_heads.get(etype, {})

    def clusters_of_span(self, span: Span) -> list:
        return self._cluster_of_span.get(span, [])

    # -- queries backed by indices -------------------------------------------

    def str_to_spans(self, s: str) -> set:
        """All spans whose surface tokens equal the whitespace-split query,
        token for token and case-sensitively."""
        self._check_indexed()
        words = s.split()
        if not words:
            raise ValueError("str_to_spans requires a non-empty string")
        k = len(words)
        # Anchor on the rarest word and check its neighbors in place.
        anchor = min(range(k), key=lambda i: len(self._word_index.get(words[i], ())))
        postings = self._word_index.get(words[anchor], ())
        if k == 1:
            return {(sid, off, off) for sid, off in postings}
        sentences = self.sentences
        out = set()
        for sid, off in postings:
            start = off - anchor
            if start < 1:
                continue
            toks = sentences[sid].tokens
            if start + k - 1 > len(toks):
                continue
            ok = True
            for i in range(k):
                if i != anchor and toks[start + i - 1].surface != words[i]:
                    ok = False
                    break
            if ok:
                out.add((sid, start, start + k - 1))
        return out

    def occurrence_count(self, word: str) -> int:
        self._check_indexed()
        return len(self._word_index.get(word, []))

    def search_sentences(self, keyword: str, limit: Optional[int] = None) -> list:
        """Sentence ids containing the keyword, case-insensitively, ascending."""
        self._check_indexed()
        hits = sorted({sid for sid, _ in self._lword_index.get(keyword.lower(), [])})
        return hits[:limit] if limit is not None else hits

    def word_postings(self, word: str) -> list:
        self._check_indexed()
        return self._word_index.get(word, [])

    def dep_pairs(self, label: str) -> list:
        return self._dep_by_label.get(label, [])

    def deps_of_head(self, label: str, head: Pos) -> list:
        return self._dep_head_index.get(label, {}).get(head, [])

    def heads_of_dep(self, label: str, dependent: Pos) -> list:
        return self._dep_dep_index.get(label, {}).get(dependent, [])

    def edges_of_sentence(self, sentence_id: int) -> list:
        return self._edges_by_sentence.get(sentence_id, [])

    def capitalized_positions(self) -> list:
        return self._capitalized

    def coref_pairs(self) -> list:
        return self._coref_pairs

    def cluster_rows(self) -> list:
        return self._cluster_rows

    # -- gazetteer recognition ------------------------------------------------

    def register_gazetteer(self, etype: str, headwords: Iterable[str]) -> int:
        """Add an entity type recognized by head-word lookup over noun chunks.

        A chunk is a maximal run of proper-noun/determiner/preposition tokens
        outside existing entity mentions; its head is the last token of the
        first capitalized proper-noun run, and the recorded mention span is
        the chunk with filler tokens trimmed from both ends.  Returns the
        number of mentions added.
        """
        self._check_mutable()
        existing = {m.etype for m in self.entity_mentions}
        if etype in existing:
            raise ValueError(f"entity type {etype!r} already defined")
        headwords = set(headwords)
        added = 0
        claimed = {}
        for m in self.entity_mentions:
            sid, start, end = m.span
            for off in range(start, end + 1):
                claimed[(sid, off)] = True
        for sent in self.sentences:
            sid = sent.sentence_id
            run = []
            for tok in sent.tokens + [None]:
                in_run = (
                    tok is not None
                    and not claimed.get(tok.pos)
                    and (tok.tag in _PROPER_TAGS or tok.tag in _CHUNK_FILLER_TAGS)
                )
                if in_run:
                    run.append(tok)
                    continue
                if run:
                    added += self._emit_gazetteer_mention(run, etype, headwords)
                    run = []
        return added

    def _emit_gazetteer_mention(self, run: list, etype: str, headwords: set) -> int:
        # Trim filler tokens from the edges; the span must start and end on
        # proper nouns.
        while run and run[0].tag in _CHUNK_FILLER_TAGS:
            run.pop(0)
        while run and run[-1].tag in _CHUNK_FILLER_TAGS:
            run.pop()
        if not run:
            return 0
        head = None
        for tok in run:
            if tok.tag in _PROPER_TAGS and tok.surface[:1].isupper():
                head = tok
            elif head is not None:
                break
        if head is None or head.surface not in headwords:
            return 0
        sid = run[0].pos[0]
        span = (sid, run[0].pos[1], run[-1].pos[1])
        self.entity_mentions.append(EntityMention(span, etype, source="gazetteer"))
        return 1

    # -- index construction ----------------------------------------------------

    def build(self) -> "Corpus":
        """Build every index and freeze the corpus."""
        word_index: dict = {}
        lword_index: dict = {}
        for sent in self.sentences:
            for tok in sent.tokens:
                word_index.setdefault(tok.surface, []).append(tok.pos)
                lword_index.setdefault(tok.surface.lower(), []).append(tok.pos)
        for postings in word_index.values():
            postings.sort()
        for postings in lword_index.values():
            postings.sort()
        self._word_index = word_index
        self._lword_index = lword_index

        dep_by_label: dict = {}
        head_index: dict = {}
        dep_index: dict = {}
        governors: dict = {}
        edge_heads: set = set()
        edges_by_sentence: dict = {}
        for e in self.dep_edges:
            lab = canonical_label(e.label)
            dep_by_label.setdefault(lab, []).append((e.head, e.dependent))
            head_index.setdefault(lab, {}).setdefault(e.head, []).append(e.dependent)
            dep_index.setdefault(lab, {}).setdefault(e.dependent, []).append(e.head)
            governors.setdefault(e.dependent, e.head)
            edge_heads.add(e.head)
            edges_by_sentence.setdefault(e.head[0], []).append(e)
        for pairs in dep_by_label.values():
            pairs.sort()
        self._dep_by_label = dep_by_label
        self._dep_head_index = head_index
        self._dep_dep_index = dep_index
        self._governors = governors
        self._edge_heads = edge_heads
        self._edges_by_sentence = edges_by_sentence

        by_type: dict = {}
        heads: dict = {}
        head_mention: dict = {}
        for m in sorted(self.entity_mentions, key=lambda m: (m.span, m.etype)):
            by_type.setdefault(m.etype, []).append(m)
            hpos = self.head_of_span(m.span)
            prev = heads.setdefault(m.etype, {}).get(hpos)
            if prev is None or _span_len(m.span) > _span_len(prev.span):
                heads[m.etype][hpos] = m
            prev_any = head_mention.get(hpos)
            if prev_any is None or _span_len(m.span) > _span_len(prev_any.span):
                head_mention[hpos] = m
        self._entity_by_type = by_type
        self._entity_heads = heads
        self._head_mention = head_mention

        self._capitalized = sorted(
            t.pos for t in self.iter_tokens() if t.surface[:1].isupper())

        cluster_of_span: dict = {}
        pairs = set()
        rows = set()
        for c in self.coref_clusters:
            for m in c.mentions:
                cluster_of_span.setdefault(m, []).append(c.cluster_id)
                rows.add((m, c.cluster_id))
            for m1 in c.mentions:
                for m2 in c.mentions:
                    pairs.add((m1, m2))
        self._cluster_of_span = cluster_of_span
        self._coref_pairs = sorted(pairs)
        self._cluster_rows = sorted(rows)

        self.indexed = True
        self._frozen = True
        return self

    def stats(self) -> dict:
        """Cardinality statistics consumed by the plan optimizer."""
        return {
            "sentences": self.sentence_count,
            "tokens": self.token_count,
            "dep_counts": {lab: len(v) for lab, v in self._dep_by_label.items()},
            "entity_counts": {t: len(v) for t, v in self._entity_heads.items()},
            "word_counts": {w: len(p) for w, p in self._word_index.items()},
        }


def _span_len(span: Span) -> int:
    return span[2] - span[1] + 1


class CorpusBuilder:
    """Incremental construction of a corpus, used by the file reader and by
    synthetic-corpus generators."""

    def __init__(self):
        self._corpus = Corpus()
        self._current_doc = "doc0"
        self._seen_sentence_ids = set()
        self._pending_clusters: dict = {}

    def start_document(self, doc_id: str):
        self._current_doc = doc_id

    def add_sentence(self, tokens, deps=(), ners=(), corefs=(), declared_id=None,
                     line_no=None) -> int:
        """Append one sentence.

        ``tokens`` is a list of (surface, lemma, tag) triples; ``deps`` of
        (label, head_offset, dependent_offset); ``ners`` of
        (etype, start, end); ``corefs`` of (cluster_id, [(start, end), ...]).
        Returns the assigned global sentence id.
        """
        corpus = self._corpus
        corpus._check_mutable()
        if declared_id is not None:
            if declared_id in self._seen_sentence_ids:
                raise CorpusFormatError(
                    f"duplicate sentence id {declared_id}", line_no)
            self._seen_sentence_ids.add(declared_id)
        sid = len(corpus.sentences)
        tok_objs = []
        for i, (surface, lemma, tag) in enumerate(tokens, start=1):
            if not surface:
                raise CorpusFormatError("empty token surface", line_no)
            tok_objs.append(Token((sid, i), surface, lemma, tag))
        n = len(tok_objs)
        sent = Sentence(sid, self._current_doc, tok_objs)
        corpus.sentences.append(sent)
        corpus.doc_ids.append(self._current_doc)
        for label, h, d in deps:
            if not (1 <= h <= n) or not (1 <= d <= n):
                raise CorpusFormatError(
                    f"dependency {label}({h},{d}) references a nonexistent token "
                    f"in a {n}-token sentence", line_no)
            if not label:
                raise CorpusFormatError("empty dependency label", line_no)
            corpus.dep_edges.append(
                DepEdge((sid, h), (sid, d), canonical_label(label)))
        for etype, start, end in ners:
            if not (1 <= start <= end <= n):
                raise CorpusFormatError(
                    f"entity span {start}-{end} out of range", line_no)
            corpus.entity_mentions.append(EntityMention((sid, start, end), etype))
        for cluster_id, spans in corefs:
            for start, end in spans:
                if not (1 <= start <= end <= n):
                    raise CorpusFormatError(
                        f"coreference span {start}-{end} out of range", line_no)
            entry = self._pending_clusters.setdefault(cluster_id, [])
            entry.extend((sid, start, end) for start, end in spans)
        return sid

    def finish(self) -> Corpus:
        corpus = self._corpus
        for cluster_id in sorted(self._pending_clusters):
            spans = self._pending_clusters[cluster_id]
            corpus.coref_clusters.append(CorefCluster(
                cluster_id, frozenset(spans), representative=spans[0]))
        return corpus


def ingest(stream) -> Corpus:
    """Parse the corpus file format into an unindexed corpus.

    Format (UTF-8, tab-separated, blank line between sentences)::

        #doc <doc_id>
        #sent <sentence_id>
        <offset>\\t<surface>\\t<lemma>\\t<postag>
        #dep <label>\\t<head_offset>\\t<dependent_offset>
        #ner <etype>\\t<start>\\t<end>
        #coref <cluster_id>\\t<start>-<end>[,<start>-<end>...]
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    builder = CorpusBuilder()
    state = _SentenceAccumulator()
    for line_no, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            state.flush(builder)
            continue
        if line.startswith("#doc"):
            state.flush(builder)
            parts = line.split(None, 1)
            if len(parts) != 2:
                raise CorpusFormatError("#doc requires a document id", line_no)
            builder.start_document(parts[1].strip())
        elif line.startswith("#sent"):
            state.flush(builder)
            parts = line.split(None, 1)
            if len(parts) != 2:
                raise CorpusFormatError("#sent requires a sentence id", line_no)
            try:
                state.begin(int(parts[1]), line_no)
            except ValueError:
                raise CorpusFormatError(
                    f"bad sentence id {parts[1]!r}", line_no) from None
        elif line.startswith("#dep"):
            state.add_dep(line, line_no)
        elif line.startswith("#ner"):
            state.add_ner(line, line_no)
        elif line.startswith("#coref"):
            state.add_coref(line, line_no)
        elif line.startswith("#"):
            raise CorpusFormatError(f"unknown directive {line.split()[0]!r}", line_no)
        else:
            state.add_token(line, line_no)
    state.flush(builder)
    return builder.finish()


class _SentenceAccumulator:
    def __init__(self):
        self._reset()

    def _reset(self):
        self.active = False
        self.declared_id = None
        self.first_line = None
        self.tokens = []
        self.deps = []
        self.ners = []
        self.corefs = []

    def begin(self, declared_id: int, line_no: int):
        self.active = True
        self.declared_id = declared_id
        self.first_line = line_no

    def _require_active(self, line_no):
        if not self.active:
            raise CorpusFormatError("content outside a #sent block", line_no)

    def add_token(self, line: str, line_no: int):
        self._require_active(line_no)
        cols = line.split("\t")
        if len(cols) != 4:
            raise CorpusFormatError(
                f"token line needs 4 tab-separated fields, got {len(cols)}", line_no)
        try:
            offset = int(cols[0])
        except ValueError:
            raise CorpusFormatError(f"bad token offset {cols[0]!r}", line_no) from None
        if offset != len(self.tokens) + 1:
            raise CorpusFormatError(
                f"token offset {offset} out of sequence "
                f"(expected {len(self.tokens) + 1})", line_no)
        self.tokens.append((cols[1], cols[2], cols[3]))

    def _tail(self, line: str, directive: str, line_no: int) -> list:
        body = line[len(directive):].strip()
        if not body:
            raise CorpusFormatError(f"{directive} line is empty", line_no)
        return body.split("\t")

    def add_dep(self, line: str, line_no: int):
        self._require_active(line_no)
        cols = self._tail(line, "#dep", line_no)
        if len(cols) != 3:
            raise CorpusFormatError("#dep needs label, head, dependent", line_no)
        try:
            h, d = int(cols[1]), int(cols[2])
        except ValueError:
            raise CorpusFormatError("bad #dep offsets", line_no) from None
        n = len(self.tokens)
        if not (1 <= h <= n) or not (1 <= d <= n):
            raise CorpusFormatError(
                f"dependency {cols[0]}({h},{d}) references a nonexistent token "
                f"in a {n}-token sentence", line_no)
        self.deps.append((cols[0], h, d))

    def add_ner(self, line: str, line_no: int):
        self._require_active(line_no)
        cols = self._tail(line, "#ner", line_no)
        if len(cols) != 3:
            raise CorpusFormatError("#ner needs etype, start, end", line_no)
        try:
            start, end = int(cols[1]), int(cols[2])
        except ValueError:
            raise CorpusFormatError("bad #ner offsets", line_no) from None
        if not (1 <= start <= end <= len(self.tokens)):
            raise CorpusFormatError(f"entity span {start}-{end} out of range", line_no)
        self.ners.append((cols[0], start, end))

    def add_coref(self, line: str, line_no: int):
        self._require_active(line_no)
        cols = self._tail(line, "#coref", line_no)
        if len(cols) != 2:
            raise CorpusFormatError("#coref needs cluster id and span list", line_no)
        try:
            cluster_id = int(cols[0])
        except ValueError:
            raise CorpusFormatError(f"bad cluster id {cols[0]!r}", line_no) from None
        spans = []
        for piece in cols[1].split(","):
            try:
                start_s, end_s = piece.split("-")
                spans.append((int(start_s), int(end_s)))
            except ValueError:
                raise CorpusFormatError(f"bad coref span {piece!r}", line_no) from None
        n = len(self.tokens)
        for start, end in spans:
            if not (1 <= start <= end <= n):
                raise CorpusFormatError(
                    f"coreference span {start}-{end} out of range", line_no)
        self.corefs.append((cluster_id, spans))

    def flush(self, builder: CorpusBuilder):
        if not self.active:
            return
        builder.add_sentence(
            self.tokens, self.deps, self.ners, self.corefs,
            declared_id=self.declared_id, line_no=self.first_line)
        self._reset()


def build_indices(corpus: Corpus) -> Corpus:
    """Index the corpus and freeze it; see :meth:`Corpus.build`."""
    return corpus.build()


def load_corpus(path) -> Corpus:
    with open(path, encoding="utf-8") as fh:
        return ingest(fh)


def is_pronoun_mention(corpus: Corpus, span: Span) -> bool:
    sid, start, end = span
    if start != end:
        return False
    tok = corpus.token_at((sid, start))
    if tok is None:
        return False
    return tok.tag in _PRONOUN_TAGS or tok.surface.lower() in _PRONOUN_WORDS
