"""Plan evaluation and ruleset materialization over an indexed corpus.

Joins run as index nested loops whenever the inner side is a scan that the
corpus (or a materialized predicate) can probe on the join key; otherwise a
hash join builds on the inner side.  Derived predicates materialize in
dependency order, so a rule sees every predicate defined before it.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .compiler import CompileError, CompiledRule, compile_rule, optimize
from .plan import (AntiJoin, Col, FieldOf, Join, Lit, PosShift, Project, Scan,
                   Select, SpanFrom, eval_expr)
from .plan import Union as PlanUnion
from .rules import Registry, Ruleset, RuleError, VarType, infer_types


class ExecutionError(RuleError):
    pass


@dataclass
class TupleSet:
    schema: tuple
    rows: set

    def sorted_rows(self) -> list:
        return sorted(self.rows)

    def __len__(self):
        return len(self.rows)


@dataclass(frozen=True)
class Extraction:
    relation: str
    arg1: str
    arg2: str
    arg1_span: tuple
    arg2_span: tuple
    sentence_id: int
    doc_id: str
    rule_id: str

    def tsv_row(self) -> str:
        s1, s2 = self.arg1_span, self.arg2_span
        return "\t".join([
            self.relation, self.arg1, self.arg2, self.doc_id,
            str(self.sentence_id), f"{s1[1]}-{s1[2]}", f"{s2[1]}-{s2[2]}",
            self.rule_id,
        ])


@dataclass
class MaterializationResult:
    ruleset: Ruleset
    by_pred: dict            # predicate -> set of tuples
    rule_rows: dict          # rule_id -> set of tuples (pre cross-rule dedup)
    rule_counts: dict        # rule_id -> int
    rule_seconds: dict       # rule_id -> float
    order: list              # predicate evaluation order
    recomputed: list = field(default_factory=list)

    def tuples(self, pred: str) -> set:
        return self.by_pred.get(pred, set())

    def count(self, rule_id: str) -> int:
        return self.rule_counts.get(rule_id, 0)


# -- scan evaluation ------------------------------------------------------------


def _token_value(tok, field_name):
    if field_name == "surface":
        return tok.surface
    if field_name == "lemma":
        return tok.lemma
    return tok.tag


def _scan_rows(node: Scan, corpus, derived):
    """Full enumeration of a scan's relation rows (before column projection)."""
    kind = node.rel[0]
    if kind == "unit":
        yield ()
        return
    if kind == "token":
        fld = node.rel[1]
        const_surface = None
        if fld == "surface":
            for idx, val in node.consts:
                if idx == 1:
                    const_surface = val
        if const_surface is not None:
            for pos in corpus.word_postings(const_surface):
                yield (pos, const_surface)
            return
        for tok in corpus.iter_tokens():
            yield (tok.pos, _token_value(tok, fld))
        return
    if kind == "dep":
        yield from corpus.dep_pairs(node.rel[1])
        return
    if kind == "entity":
        yield from ((p,) for p in corpus.entity_head_positions(node.rel[1]))
        return
    if kind == "derived":
        rows = derived.get(node.rel[1])
        if rows is None:
            raise ExecutionError(
                f"derived predicate {node.rel[1]!r} is not materialized yet")
        yield from rows
        return
    if kind == "coref":
        yield from corpus.coref_pairs()
        return
    if kind == "cluster":
        yield from corpus.cluster_rows()
        return
    if kind == "virtual":
        yield from _virtual_rows(node.rel[1], corpus)
        return
    raise ExecutionError(f"unknown relation {node.rel!r}")


def _virtual_rows(vname: str, corpus):
    if vname == "capitalized":
        yield from ((p,) for p in corpus.capitalized_positions())
    elif vname == "token_before":
        for sent in corpus.sentences:
            n = len(sent)
            sid = sent.sentence_id
            for i in range(1, n + 1):
                for j in range(i + 1, n + 1):
                    yield ((sid, i), (sid, j))
    elif vname == "same_sentence":
        for sent in corpus.sentences:
            n = len(sent)
            sid = sent.sentence_id
            for i in range(1, n + 1):
                for j in range(1, n + 1):
                    yield ((sid, i), (sid, j))
    elif vname == "head_of":
        for span in corpus.iter_spans():
            yield (span, corpus.head_of_span(span))
    elif vname == "str_span":
        for span in corpus.iter_spans():
            yield (corpus.span_surface(span), span)
    elif vname == "span_member":
        for span in corpus.iter_spans():
            sid, start, end = span
            for off in range(start, end + 1):
                yield (span, (sid, off))
    else:
        raise ExecutionError(f"unknown virtual relation {vname!r}")


def _virtual_probe(vname: str, corpus, col: int, value):
    """Rows of a virtual relation with one column pinned, or None when the
    relation has no probe path for that column."""
    if vname == "token_before":
        if not isinstance(value, tuple) or len(value) != 2:
            return []
        sid, off = value
        sent = corpus.sentences[sid] if 0 <= sid < corpus.sentence_count else None
        if sent is None or not (1 <= off <= len(sent)):
            return []
        if col == 0:
            return [((sid, off), (sid, j)) for j in range(off + 1, len(sent) + 1)]
        return [((sid, i), (sid, off)) for i in range(1, off)]
    if vname == "same_sentence":
        if not isinstance(value, tuple) or len(value) != 2:
            return []
        sid, off = value
        sent = corpus.sentences[sid] if 0 <= sid < corpus.sentence_count else None
        if sent is None or not (1 <= off <= len(sent)):
            return []
        row = [(sid, j) for j in range(1, len(sent) + 1)]
        if col == 0:
            return [((sid, off), q) for q in row]
        return [(q, (sid, off)) for q in row]
    if vname == "capitalized":
        tok = corpus.token_at(value) if isinstance(value, tuple) else None
        return [(value,)] if tok is not None and tok.surface[:1].isupper() else []
    if vname == "head_of":
        if col == 0:
            if not _valid_span(corpus, value):
                return []
            return [(value, corpus.head_of_span(value))]
        return None
    if vname == "str_span":
        if col == 0:
            if not isinstance(value, str) or not value.split():
                return []
            return [(value, sp) for sp in sorted(corpus.str_to_spans(value))]
        if col == 1:
            if not _valid_span(corpus, value):
                return []
            return [(corpus.span_surface(value), value)]
    if vname == "span_member":
        if col == 0:
            if not _valid_span(corpus, value):
                return []
            sid, start, end = value
            return [(value, (sid, off)) for off in range(start, end + 1)]
        if col == 1:
            if not isinstance(value, tuple) or len(value) != 2:
                return []
            sid, off = value
            if corpus.token_at(value) is None:
                return []
            n = len(corpus.sentences[sid])
            return [((sid, s, e), value)
                    for s in range(1, off + 1) for e in range(off, n + 1)]
    return None


def _valid_span(corpus, value) -> bool:
    if not isinstance(value, tuple) or len(value) != 3:
        return False
    sid, start, end = value
    if not (0 <= sid < corpus.sentence_count):
        return False
    return 1 <= start <= end <= len(corpus.sentences[sid])


def _scan_probe(node: Scan, corpus, derived, probe_col: int, value):
    """Relation rows with ``probe_col`` pinned to ``value``; None when no
    index path exists for that column."""
    kind = node.rel[0]
    if kind == "token":
        if probe_col == 0:
            tok = corpus.token_at(value) if isinstance(value, tuple) else None
            if tok is None:
                return []
            return [(value, _token_value(tok, node.rel[1]))]
        return None
    if kind == "dep":
        label = node.rel[1]
        if probe_col == 0:
            return [(value, d) for d in corpus.deps_of_head(label, value)]
        return [(h, value) for h in corpus.heads_of_dep(label, value)]
    if kind == "entity":
        heads = corpus.entity_head_positions(node.rel[1])
        return [(value,)] if value in heads else []
    if kind == "virtual":
        return _virtual_probe(node.rel[1], corpus, probe_col, value)
    return None


def _sentence_positions(corpus, sid):
    if not isinstance(sid, int) or not (0 <= sid < corpus.sentence_count):
        return []
    n = len(corpus.sentences[sid])
    return [(sid, off) for off in range(1, n + 1)]


def _apply_scan_filters(node: Scan, raw_rows):
    consts = node.consts
    selfeq = node.selfeq
    out_cols = node.out_cols
    out = []
    for row in raw_rows:
        ok = True
        for idx, val in consts:
            if row[idx] != val:
                ok = False
                break
        if ok:
            for i, j in selfeq:
                if row[i] != row[j]:
                    ok = False
                    break
        if ok:
            out.append(tuple(row[i] for i in out_cols))
    return out


# -- node evaluation --------------------------------------------------------------


_CMP = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
}


def _eval(node, corpus, derived):
    if isinstance(node, Scan):
        return _apply_scan_filters(node, _scan_rows(node, corpus, derived))

    if isinstance(node, Select):
        rows = _eval(node.child, corpus, derived)
        index = {name: i for i, name in enumerate(node.child.schema)}
        cmp = _CMP[node.op]
        return [r for r in rows
                if cmp(eval_expr(node.left, r, index),
                       eval_expr(node.right, r, index))]

    if isinstance(node, Join):
        return _eval_join(node, corpus, derived)

    if isinstance(node, AntiJoin):
        left_rows = _eval(node.left, corpus, derived)
        if not left_rows:
            return []
        right_rows = _eval(node.right, corpus, derived)
        lidx = {name: i for i, name in enumerate(node.left.schema)}
        ridx = {name: i for i, name in enumerate(node.right.schema)}
        lcols = [lidx[l] for l, _ in node.keys]
        rcols = [ridx[r] for _, r in node.keys]
        present = {tuple(r[i] for i in rcols) for r in right_rows}
        return [r for r in left_rows
                if tuple(r[i] for i in lcols) not in present]

    if isinstance(node, PlanUnion):
        out = set()
        for ch in node.children:
            out.update(_eval(ch, corpus, derived))
        return list(out)

    if isinstance(node, Project):
        rows = _eval(node.child, corpus, derived)
        index = {name: i for i, name in enumerate(node.child.schema)}
        exprs = [e for _, e in node.outputs]
        out = [tuple(eval_expr(e, r, index) for e in exprs) for r in rows]
        if node.dedup:
            return list(set(out))
        return out

    raise ExecutionError(f"unknown plan node {type(node).__name__}")


def _eval_join(node: Join, corpus, derived):
    left_rows = _eval(node.left, corpus, derived)
    if not left_rows:
        return []
    lidx = {name: i for i, name in enumerate(node.left.schema)}
    right = node.right
    rschema = right.schema
    keep = [i for i, name in enumerate(rschema) if name not in lidx]

    if not node.keys:
        right_rows = _eval(right, corpus, derived)
        return [l + tuple(r[i] for i in keep)
                for l in left_rows for r in right_rows]

    # Index nested loop: the inner side is a bare scan probeable on a single
    # key that is a plain column (or the sentence id of a position column).
    if isinstance(right, Scan) and len(node.keys) >= 1:
        probe = _probe_strategy(node, right)
        if probe is not None:
            return _index_nested_loop(node, left_rows, lidx, right, keep,
                                      probe, corpus, derived)

    right_rows = _eval(right, corpus, derived)
    ridx = {name: i for i, name in enumerate(rschema)}
    table = {}
    for r in right_rows:
        key = tuple(eval_expr(re_, r, ridx) for _, re_ in node.keys)
        table.setdefault(key, []).append(r)
    out = []
    for l in left_rows:
        key = tuple(eval_expr(le, l, lidx) for le, _ in node.keys)
        for r in table.get(key, ()):
            out.append(l + tuple(r[i] for i in keep))
    return out


def _probe_strategy(node: Join, right: Scan):
    """Pick the key used for index probing: a right-side plain column, or a
    sentence-id field of a position column of the token relation."""
    for ki, (le, re_) in enumerate(node.keys):
        if isinstance(re_, Col):
            rel_col = right.out_cols[right.schema.index(re_.name)]
            return ("col", ki, rel_col)
    if right.rel[0] == "token":
        for ki, (le, re_) in enumerate(node.keys):
            if isinstance(re_, FieldOf) and re_.fld in ("sid",) \
                    and re_.col in right.schema:
                return ("sid", ki, None)
    return None


def _index_nested_loop(node, left_rows, lidx, right, keep, probe, corpus,
                       derived):
    mode, ki, rel_col = probe
    other_keys = [(i, le, re_) for i, (le, re_) in enumerate(node.keys)
                  if i != ki]
    ridx = {name: i for i, name in enumerate(right.schema)}
    out = []
    cache = {}
    for l in left_rows:
        kval = eval_expr(node.keys[ki][0], l, lidx)
        rows = cache.get(kval)
        if rows is None:
            if mode == "col":
                raw = _scan_probe(right, corpus, derived, rel_col, kval)
                if raw is None:
                    raw = [r for r in _scan_rows(right, corpus, derived)
                           if r[rel_col] == kval]
            else:
                raw = [(p, _token_value(corpus.token_at(p), right.rel[1]))
                       for p in _sentence_positions(corpus, kval)]
            rows = _apply_scan_filters(right, raw)
            cache[kval] = rows
        for r in rows:
            ok = True
            for _, le, re_ in other_keys:
                if eval_expr(le, l, lidx) != eval_expr(re_, r, ridx):
                    ok = False
                    break
            if ok:
                out.append(l + tuple(r[i] for i in keep))
    return out


def eval_plan(plan, corpus, derived=None) -> TupleSet:
    """Evaluate a compiled plan to a set of tuples."""
    if not corpus.indexed:
        raise ExecutionError("corpus is not indexed")
    rows = _eval(plan, corpus, derived or {})
    return TupleSet(tuple(plan.schema), set(rows))


# -- materialization -----------------------------------------------------------------


def materialize_ruleset(ruleset: Ruleset, corpus,
                        use_optimizer: bool = True) -> MaterializationResult:
    """Evaluate every rule in dependency order and collect per-rule counts."""
    order = ruleset.evaluation_order()
    by_pred: dict = {}
    rule_rows: dict = {}
    rule_counts: dict = {}
    rule_seconds: dict = {}
    stats = corpus.stats()
    derived_sizes: dict = {}
    # A registered derived predicate without rules is simply empty.
    for name in ruleset.registry.derived_names():
        if not ruleset.rules_for(name):
            by_pred[name] = set()
            derived_sizes[name] = 0
    for pred in order:
        tuples = set()
        for rule in ruleset.rules_for(pred):
            started = time.perf_counter()
            rows = evaluate_rule(rule, ruleset.registry, corpus, by_pred,
                                 stats=stats, derived_sizes=derived_sizes,
                                 use_optimizer=use_optimizer)
            rule_seconds[rule.rule_id] = time.perf_counter() - started
            rule_rows[rule.rule_id] = rows
            rule_counts[rule.rule_id] = len(rows)
            tuples |= rows
        by_pred[pred] = tuples
        derived_sizes[pred] = len(tuples)
    return MaterializationResult(ruleset, by_pred, rule_rows, rule_counts,
                                 rule_seconds, order)


def evaluate_rule(rule, registry, corpus, derived, stats=None,
                  derived_sizes=None, use_optimizer=True,
                  project="head") -> set:
    typed = infer_types(rule, registry)
    compiled = compile_rule(typed, registry, stats=stats,
                            derived_sizes=derived_sizes,
                            greedy=use_optimizer and stats is not None,
                            project=project)
    return eval_plan(compiled.plan, corpus, derived).rows


def incremental_update(ruleset: Ruleset, corpus,
                       previous: MaterializationResult,
                       use_optimizer: bool = True) -> MaterializationResult:
    """Re-materialize only predicates whose rules changed, plus everything
    downstream of them; equal to a full rebuild."""
    old_rules = {}
    for r in previous.ruleset.rules:
        old_rules.setdefault(r.head.pred, []).append(r.rule_id)
    new_rules = {}
    for r in ruleset.rules:
        new_rules.setdefault(r.head.pred, []).append(r.rule_id)

    changed = {p for p in set(old_rules) | set(new_rules)
               if old_rules.get(p) != new_rules.get(p)}

    order = ruleset.evaluation_order()
    # Downstream closure over the new dependency graph.
    affected = set(changed)
    users: dict = {}
    from .rules import rule_body_predicates
    for r in ruleset.rules:
        for used in rule_body_predicates(r):
            users.setdefault(used, set()).add(r.head.pred)
    frontier = list(changed)
    while frontier:
        p = frontier.pop()
        for q in users.get(p, ()):
            if q not in affected:
                affected.add(q)
                frontier.append(q)

    by_pred = {p: set(v) for p, v in previous.by_pred.items()
               if p in new_rules and p not in affected}
    for name in ruleset.registry.derived_names():
        if not ruleset.rules_for(name):
            by_pred[name] = set()
    rule_rows = {}
    rule_counts = {}
    rule_seconds = {}
    for r in ruleset.rules:
        if r.head.pred not in affected and r.rule_id in previous.rule_rows:
            rule_rows[r.rule_id] = previous.rule_rows[r.rule_id]
            rule_counts[r.rule_id] = previous.rule_counts[r.rule_id]
            rule_seconds[r.rule_id] = previous.rule_seconds.get(r.rule_id, 0.0)

    stats = corpus.stats()
    derived_sizes = {p: len(v) for p, v in by_pred.items()}
    recomputed = []
    for pred in order:
        if pred not in affected:
            continue
        recomputed.append(pred)
        tuples = set()
        for rule in ruleset.rules_for(pred):
            started = time.perf_counter()
            rows = evaluate_rule(rule, ruleset.registry, corpus, by_pred,
                                 stats=stats, derived_sizes=derived_sizes,
                                 use_optimizer=use_optimizer)
            rule_seconds[rule.rule_id] = time.perf_counter() - started
            rule_rows[rule.rule_id] = rows
            rule_counts[rule.rule_id] = len(rows)
            tuples |= rows
        by_pred[pred] = tuples
        derived_sizes[pred] = len(tuples)
    return MaterializationResult(ruleset, by_pred, rule_rows, rule_counts,
                                 rule_seconds, order, recomputed=recomputed)


# -- extractions ------------------------------------------------------------------------


def _argument_of(corpus, value):
    """(string, span) for a Pos or Span tuple value, preferring the full
    surface of the entity mention headed at a position."""
    if len(value) == 2:  # position
        mention = corpus.mention_at_head(value)
        if mention is not None:
            return corpus.span_surface(mention.span), mention.span
        tok = corpus.token_at(value)
        if tok is None:
            raise ExecutionError(f"position {value} outside the corpus")
        return tok.surface, (value[0], value[1], value[1])
    return corpus.span_surface(value), value


def extractions(relation: str, result: MaterializationResult,
                corpus) -> list:
    """Mention-level extractions for a binary derived predicate."""
    sig = result.ruleset.registry.get(relation)
    if len(sig.arg_types) != 2:
        raise ExecutionError(
            f"extractions require a binary relation; {relation!r} has arity "
            f"{len(sig.arg_types)}")
    for t in sig.arg_types:
        if t not in (VarType.POS, VarType.SPAN):
            raise ExecutionError(
                f"extractions require Pos or Span arguments; {relation!r} "
                f"has {t}")
    rules = [r for r in result.ruleset.rules if r.head.pred == relation]
    out = []
    for row in sorted(result.tuples(relation)):
        rule_id = ""
        for r in rules:
            if row in result.rule_rows.get(r.rule_id, ()):
                rule_id = r.rule_id
                break
        arg1, span1 = _argument_of(corpus, row[0])
        arg2, span2 = _argument_of(corpus, row[1])
        sid = span1[0]
        out.append(Extraction(relation, arg1, arg2, span1, span2, sid,
                              corpus.doc_ids[sid], rule_id))
    return out


def export_tsv(extraction_list) -> str:
    return "\n".join(e.tsv_row() for e in extraction_list) + (
        "\n" if extraction_list else "")
