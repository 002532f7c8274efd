"""Compilation of typed, safe rules into relational plans.

Conjunctions become joins (natural joins on shared variables), negation an
anti-join against the negated subformula's plan, disjunction a deduplicating
union, and existential quantification a projection.  ``str2span`` with a
constant string unfolds into adjacency-joined token scans; ``span2pos`` with a
bound span into a token scan constrained by a span-membership range.  The
remaining built-ins evaluate as virtual relations with probe support.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional

from . import inflect
from .plan import (AntiJoin, Col, FieldOf, Join, Lit, PosShift, Project,
                   Scan, Select, SpanFrom, Union)
from .rules import (And, Atom, Compare, Const, Exists, Not, Or, Registry,
                    Rule, RuleError, TypedRule, Var, free_vars, normalize,
                    print_atom, KIND_INTENSIONAL)

UNIT_SCAN = Scan(("unit",), (), (), (), ())

_VIRTUAL_PREDS = {
    "tokenBefore": "token_before",
    "sameSentence": "same_sentence",
    "isCapitalized": "capitalized",
    "headOf": "head_of",
    "str2span": "str_span",
    "span2pos": "span_member",
}


class CompileError(RuleError):
    pass


@dataclass
class CompiledRule:
    rule_id: str
    head_pred: str
    plan: object
    referenced_predicates: frozenset
    head_arity: int
    source: object = dc_field(default=None, repr=False)


# -- intensional expansion -------------------------------------------------------


def expand_intensional(atom: Atom, registry: Registry, fresh=None,
                       table: Optional[inflect.InflectionTable] = None):
    """Expansion template for a built-in intensional predicate.

    Verb-pattern predicates return a formula over extensional relations;
    ``str2span`` with a constant string returns its plan fragment (token scans
    chained by offset).  Other built-ins expand only inside a full rule
    compilation, where their binding context is known.
    """
    sig = registry.get(atom.pred)
    if sig.kind != KIND_INTENSIONAL:
        raise CompileError(f"{atom.pred!r} is not an intensional predicate")
    if fresh is None:
        fresh = _fresh_namer(set(atom.variables()))
    if atom.pred in ("actInd", "passInd"):
        return _expand_verb_pattern(atom, fresh, table)
    if atom.pred == "str2span" and isinstance(atom.args[0], Const):
        span_var = atom.args[1]
        if not isinstance(span_var, Var):
            raise CompileError("str2span requires a span variable")
        return _str2span_chain(atom.args[0].value, span_var.name)
    raise CompileError(
        f"{atom.pred!r} has no standalone expansion; it is compiled in rule "
        "context")


def _expand_verb_pattern(atom: Atom, fresh, table):
    if len(atom.args) != 3 or not isinstance(atom.args[2], Const) \
            or not isinstance(atom.args[2].value, str):
        raise CompileError(
            f"{atom.pred} requires a constant base verb as its third argument")
    for i in (0, 1):
        if not isinstance(atom.args[i], Var):
            raise CompileError(f"{atom.pred} argument {i + 1} must be a variable")
    base = atom.args[2].value.lower()
    if not base.isalpha():
        raise CompileError(f"unknown verb base {base!r}")
    if atom.pred == "actInd":
        return inflect.expand_act_ind(
            atom.args[0].name, atom.args[1].name, base, fresh, table)
    return inflect.expand_pass_ind(
        atom.args[0].name, atom.args[1].name, base, fresh, table)


def _fresh_namer(used: set):
    def fresh(base: str) -> str:
        if base not in used:
            used.add(base)
            return base
        n = 1
        while f"{base}_{n}" in used:
            n += 1
        used.add(f"{base}_{n}")
        return f"{base}_{n}"
    return fresh


def _expand_formula(f, registry: Registry, fresh, table):
    if isinstance(f, Atom):
        if f.pred in ("actInd", "passInd"):
            return _expand_verb_pattern(f, fresh, table)
        return f
    if isinstance(f, And):
        return And(tuple(_expand_formula(p, registry, fresh, table)
                         for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(_expand_formula(p, registry, fresh, table)
                        for p in f.parts))
    if isinstance(f, Not):
        return Not(_expand_formula(f.body, registry, fresh, table))
    if isinstance(f, Exists):
        return Exists(f.var, _expand_formula(f.body, registry, fresh, table))
    return f


# -- plan fragments ---------------------------------------------------------------


def _str2span_chain(text: str, span_var: str):
    words = text.split()
    if not words:
        raise CompileError("str2span requires a non-empty string constant")
    cols = [f"{span_var}__w{i}" for i in range(len(words))]
    plan = Scan(("token", "surface"), (cols[0],), (0,), ((1, words[0]),), ())
    for i in range(1, len(words)):
        right = Scan(("token", "surface"), (cols[i],), (0,), ((1, words[i]),), ())
        plan = Join(plan, right,
                    ((PosShift(cols[0], i), Col(cols[i])),),
                    plan.schema + right.schema)
    return Project(plan, ((span_var, SpanFrom(cols[0], cols[-1])),), dedup=True)


def _natural_join(left, right):
    if left is None:
        return right
    shared = [v for v in right.schema if v in left.schema]
    keys = tuple((Col(v), Col(v)) for v in shared)
    schema = left.schema + tuple(v for v in right.schema if v not in left.schema)
    return Join(left, right, keys, schema)


def _project_to(plan, cols):
    if tuple(plan.schema) == tuple(cols):
        return plan
    return Project(plan, tuple((c, Col(c)) for c in cols), dedup=True)


# -- factors ------------------------------------------------------------------------

_BIG = 10 ** 9


class _Factor:
    provides: frozenset = frozenset()
    requires: frozenset = frozenset()
    reducer = False

    def estimate(self, stats) -> float:
        return _BIG

    def attach(self, current):
        raise NotImplementedError


class _ScanFactor(_Factor):
    def __init__(self, subplan, est):
        self.subplan = subplan
        self.provides = frozenset(subplan.schema)
        self._est = est

    def estimate(self, stats):
        return self._est

    def attach(self, current):
        return _natural_join(current, self.subplan)


class _CompareFactor(_Factor):
    reducer = True

    def __init__(self, cmp: Compare):
        self.cmp = cmp
        self.requires = frozenset(
            t.name for t in (cmp.left, cmp.right) if isinstance(t, Var))

    def estimate(self, stats):
        return 0

    def attach(self, current):
        if current is None:
            current = UNIT_SCAN
        to_expr = lambda t: Col(t.name) if isinstance(t, Var) else Lit(t.value)
        return Select(current, self.cmp.op, to_expr(self.cmp.left),
                      to_expr(self.cmp.right))


class _AntiJoinFactor(_Factor):
    reducer = True

    def __init__(self, inner_plan, inner_vars):
        self.inner = inner_plan
        self.requires = frozenset(inner_vars)

    def estimate(self, stats):
        return 0

    def attach(self, current):
        if current is None:
            if self.requires:
                raise CompileError(
                    "internal error: unsafe negation reached compilation")
            current = UNIT_SCAN
        keys = tuple((v, v) for v in self.inner.schema)
        missing = [v for v, _ in keys if v not in current.schema]
        if missing:
            raise CompileError(
                f"internal error: negation over unbound variables {missing}")
        return AntiJoin(current, self.inner, keys)


class _Span2PosFactor(_Factor):
    """Membership of a position in a span; expands to a range-constrained
    token scan once the span is bound, otherwise scans the virtual
    span-membership relation."""

    def __init__(self, span_var: str, pos_var: str, est):
        self.span_var = span_var
        self.pos_var = pos_var
        self.provides = frozenset({span_var, pos_var})
        self._est = est

    def estimate(self, stats):
        return self._est

    def attach(self, current):
        sp, p = self.span_var, self.pos_var
        if current is not None and sp in current.schema:
            if p in current.schema:
                plan = Select(current, "=", FieldOf(sp, "sid"), FieldOf(p, "sid"))
            else:
                scan = Scan(("token", "surface"), (p,), (0,), (), ())
                plan = Join(current, scan,
                            ((FieldOf(sp, "sid"), FieldOf(p, "sid")),),
                            current.schema + (p,))
            plan = Select(plan, "<=", FieldOf(sp, "start"), FieldOf(p, "offset"))
            return Select(plan, "<=", FieldOf(p, "offset"), FieldOf(sp, "end"))
        scan = Scan(("virtual", "span_member"), (sp, p), (0, 1), (), ())
        return _natural_join(current, scan)


def _atom_factor(atom: Atom, registry: Registry, stats, derived_sizes):
    sig = registry.resolve(atom.pred)
    if sig is None:
        raise CompileError(f"unknown predicate {atom.pred!r} (registry drift)")
    name = atom.pred

    if name in ("token", "lemma", "postag"):
        field = {"token": "surface", "lemma": "lemma", "postag": "tag"}[name]
        rel = ("token", field)
        est = stats.get("tokens", _BIG) if stats else _BIG
        if isinstance(atom.args[1], Const):
            if field == "surface" and stats:
                est = stats["word_counts"].get(atom.args[1].value, 0)
            elif stats:
                est = max(1, stats.get("tokens", 100) // 100)
        return _ScanFactor(_build_scan(rel, atom), est)

    if registry.is_dep_label(name):
        est = stats["dep_counts"].get(name, 0) if stats else _BIG
        return _ScanFactor(_build_scan(("dep", name), atom), est)

    if registry.is_entity_type(name):
        est = stats["entity_counts"].get(name, 0) if stats else _BIG
        return _ScanFactor(_build_scan(("entity", name), atom), est)

    if sig.kind == "derived":
        est = derived_sizes.get(name, 1000) if derived_sizes is not None else _BIG
        return _ScanFactor(_build_scan(("derived", name), atom), est)

    if name == "corefSpan":
        return _ScanFactor(_build_scan(("coref",), atom),
                           stats.get("coref_pairs", 100) if stats else _BIG)
    if name == "inCluster":
        return _ScanFactor(_build_scan(("cluster",), atom),
                           stats.get("coref_pairs", 100) if stats else _BIG)

    if name == "str2span":
        s_arg, sp_arg = atom.args
        if not isinstance(sp_arg, Var):
            raise CompileError("str2span requires a span variable")
        if isinstance(s_arg, Const):
            if not isinstance(s_arg.value, str):
                raise CompileError("str2span requires a string constant")
            first = s_arg.value.split()[0] if s_arg.value.split() else ""
            est = stats["word_counts"].get(first, 0) if stats else _BIG
            return _ScanFactor(_str2span_chain(s_arg.value, sp_arg.name), est)
        return _ScanFactor(_build_scan(("virtual", "str_span"), atom),
                           _virtual_estimate("str_span", stats))

    if name == "span2pos":
        sp_arg, p_arg = atom.args
        if not (isinstance(sp_arg, Var) and isinstance(p_arg, Var)):
            raise CompileError("span2pos requires variable arguments")
        return _Span2PosFactor(sp_arg.name, p_arg.name,
                               _virtual_estimate("span_member", stats))

    if name in _VIRTUAL_PREDS:
        vname = _VIRTUAL_PREDS[name]
        return _ScanFactor(_build_scan(("virtual", vname), atom),
                           _virtual_estimate(vname, stats))

    raise CompileError(f"unknown predicate {name!r} (registry drift)")


def _virtual_estimate(vname: str, stats) -> float:
    if not stats:
        return _BIG
    tokens = stats.get("tokens", 1000)
    return {
        "token_before": tokens * 8,
        "same_sentence": tokens * 16,
        "capitalized": max(1, tokens // 3),
        "head_of": tokens * 20,
        "str_span": tokens * 20,
        "span_member": tokens * 20,
    }.get(vname, _BIG)


def _build_scan(rel: tuple, atom: Atom) -> Scan:
    consts = []
    selfeq = []
    schema = []
    out_cols = []
    first_col = {}
    for i, arg in enumerate(atom.args):
        if isinstance(arg, Const):
            consts.append((i, arg.value))
        elif arg.name in first_col:
            selfeq.append((first_col[arg.name], i))
        else:
            first_col[arg.name] = i
            schema.append(arg.name)
            out_cols.append(i)
    return Scan(rel, tuple(schema), tuple(out_cols), tuple(consts),
                tuple(selfeq))


# -- conjunctive block assembly ---------------------------------------------------


def _block_factors(parts, registry, stats, derived_sizes):
    factors = []
    for p in parts:
        if isinstance(p, Atom):
            factors.append(_atom_factor(p, registry, stats, derived_sizes))
        elif isinstance(p, Compare):
            factors.append(_CompareFactor(p))
        elif isinstance(p, Not):
            inner_vars = tuple(sorted(free_vars(p.body)))
            inner = _compile_block(p.body, registry, stats, derived_sizes)
            factors.append(_AntiJoinFactor(_project_to(inner, inner_vars),
                                           inner_vars))
        elif isinstance(p, Or):
            out_vars = tuple(sorted(free_vars(p)))
            branches = tuple(
                _project_to(_compile_block(br, registry, stats, derived_sizes),
                            out_vars)
                for br in p.parts)
            sub = Union(branches, out_vars)
            factors.append(_ScanFactor(sub, _union_estimate(p, registry, stats,
                                                            derived_sizes)))
        elif isinstance(p, Exists):
            body_plan = _compile_block(p.body, registry, stats, derived_sizes)
            out_vars = tuple(sorted(free_vars(p)))
            factors.append(_ScanFactor(
                _project_to(body_plan, out_vars),
                _block_estimate(p.body, registry, stats, derived_sizes)))
        elif isinstance(p, And):
            factors.extend(_block_factors(p.parts, registry, stats,
                                          derived_sizes))
        else:
            raise CompileError(f"cannot compile {p!r}")
    return factors


def _union_estimate(p: Or, registry, stats, derived_sizes) -> float:
    if not stats:
        return _BIG
    return sum(_block_estimate(br, registry, stats, derived_sizes)
               for br in p.parts)


def _block_estimate(f, registry, stats, derived_sizes) -> float:
    if not stats:
        return _BIG
    parts = f.parts if isinstance(f, And) else (f,)
    ests = []
    for p in parts:
        if isinstance(p, Atom):
            try:
                ests.append(_atom_factor(p, registry, stats,
                                         derived_sizes).estimate(stats))
            except CompileError:
                ests.append(_BIG)
        elif isinstance(p, Or):
            ests.append(_union_estimate(p, registry, stats, derived_sizes))
        elif isinstance(p, Exists):
            ests.append(_block_estimate(p.body, registry, stats, derived_sizes))
    return min(ests) if ests else 1


def _order_syntactic(factors):
    order = []
    bound = set()
    pending = list(range(len(factors)))
    while pending:
        for i in pending:
            if factors[i].requires <= bound:
                order.append(i)
                pending.remove(i)
                bound |= factors[i].provides
                break
        else:
            raise CompileError(
                "internal error: unsafe rule reached compilation "
                "(unplaceable factor)")
    return order


def _order_greedy(factors, stats):
    order = []
    bound = set()
    pending = list(range(len(factors)))
    while pending:
        reducers = [i for i in pending
                    if factors[i].reducer and factors[i].requires <= bound]
        if reducers:
            i = reducers[0]
            order.append(i)
            pending.remove(i)
            continue
        eligible = [i for i in pending if factors[i].requires <= bound]
        if not eligible:
            raise CompileError(
                "internal error: unsafe rule reached compilation "
                "(unplaceable factor)")
        if bound:
            connected = [i for i in eligible if bound & factors[i].provides]
            pool = connected or eligible
        else:
            pool = eligible
        best = min(pool, key=lambda i: (factors[i].estimate(stats), i))
        order.append(best)
        pending.remove(best)
        bound |= factors[best].provides
    return order


def _compile_block(f, registry, stats, derived_sizes, greedy=False):
    parts = f.parts if isinstance(f, And) else (f,)
    factors = _block_factors(parts, registry, stats, derived_sizes)
    if not factors:
        return UNIT_SCAN
    order = (_order_greedy(factors, stats) if greedy and stats
             else _order_syntactic(factors))
    current = None
    for i in order:
        current = factors[i].attach(current)
    return current


# -- entry points --------------------------------------------------------------------


def compile_rule(typed: TypedRule, registry: Registry, stats=None,
                 derived_sizes=None, greedy=False, project="head",
                 table: Optional[inflect.InflectionTable] = None) -> CompiledRule:
    """Compile a typed, safe rule into a relational plan.

    ``project="head"`` yields the head tuple schema; ``project="all"``
    retains every body variable (used for match explanations).
    """
    rule = typed.rule
    used = set(free_vars(rule.body)) | {a.name for a in rule.head.args
                                        if isinstance(a, Var)}
    fresh = _fresh_namer(used)
    body = _expand_formula(rule.body, registry, fresh, table)
    body = normalize(body, used_names=set(used))

    refs = set()
    _collect_preds(body, refs)

    block = _compile_block(body, registry, stats, derived_sizes, greedy=greedy)
    if project == "all":
        out_vars = tuple(sorted(free_vars(rule.body)))
        plan = _project_to(block, out_vars)
    else:
        outputs = []
        for i, arg in enumerate(rule.head.args):
            if isinstance(arg, Var):
                if arg.name not in block.schema:
                    raise CompileError(
                        f"internal error: head variable {arg.name!r} missing "
                        "from compiled body")
                outputs.append((arg.name, Col(arg.name)))
            else:
                outputs.append((f"_c{i}", Lit(arg.value)))
        plan = Project(block, tuple(outputs), dedup=True)
    return CompiledRule(
        rule_id=rule.rule_id,
        head_pred=rule.head.pred,
        plan=plan,
        referenced_predicates=frozenset(refs),
        head_arity=len(rule.head.args),
        source=(typed, registry),
    )


def _collect_preds(f, acc: set):
    if isinstance(f, Atom):
        acc.add(f.pred)
    elif isinstance(f, (And, Or)):
        for p in f.parts:
            _collect_preds(p, acc)
    elif isinstance(f, (Not, Exists)):
        _collect_preds(f.body, acc)


def optimize(compiled: CompiledRule, stats, derived_sizes=None) -> CompiledRule:
    """Greedy join reordering by ascending estimated cardinality.

    Works from the rule the plan was compiled from; plans without a source
    are returned unchanged (nothing to reorder for hand-built plans).
    """
    if compiled.source is None:
        return compiled
    typed, registry = compiled.source
    return compile_rule(typed, registry, stats=stats,
                        derived_sizes=derived_sizes, greedy=True)
