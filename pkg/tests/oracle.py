"""Brute-force grounding oracle, independent of the compiler and executor.

Rules evaluate by enumerating variable assignments over the active domain
(all token positions, all contiguous spans, all corpus strings plus rule
constants) and testing the body by direct membership checks.  Each top-level
conjunct is turned once into a checking closure and applied as soon as its
variables are ground, which prunes the enumeration without changing the
accepted set.  There are no joins, no indices and no operator plans here:
quantifiers scan their whole domain, negation is plain boolean negation.
"""

from __future__ import annotations

from rexbench.rules import (And, Atom, Compare, Const, Exists, Not, Or, Var,
                            VarType, free_vars, infer_types)


def active_domains(corpus, extra_strings=(), extra_ints=()):
    positions = [t.pos for t in corpus.iter_tokens()]
    spans = list(corpus.iter_spans())
    strings = set(extra_strings)
    for tok in corpus.iter_tokens():
        strings.add(tok.surface)
        strings.add(tok.lemma)
        strings.add(tok.tag)
    for span in spans:
        strings.add(corpus.span_surface(span))
    refs = sorted({c.cluster_id for c in corpus.coref_clusters})
    return {
        VarType.POS: positions,
        VarType.SPAN: spans,
        VarType.STR: sorted(strings),
        VarType.INT: sorted(set(extra_ints)),
        VarType.REF: refs,
    }


def _rule_constants(rule):
    strings, ints = [], []

    def visit_term(t):
        if isinstance(t, Const):
            (strings if isinstance(t.value, str) else ints).append(t.value)

    def visit(f):
        if isinstance(f, Atom):
            for a in f.args:
                visit_term(a)
        elif isinstance(f, Compare):
            visit_term(f.left)
            visit_term(f.right)
        elif isinstance(f, (And, Or)):
            for p in f.parts:
                visit(p)
        elif isinstance(f, (Not, Exists)):
            visit(f.body)

    visit(rule.head)
    visit(rule.body)
    return strings, ints


def _is_span(corpus, value) -> bool:
    if not isinstance(value, tuple) or len(value) != 3:
        return False
    sid, start, end = value
    if not (0 <= sid < corpus.sentence_count):
        return False
    return 1 <= start <= end <= len(corpus.sentences[sid])


_CMP = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
}


def _getter(term):
    if isinstance(term, Var):
        name = term.name
        return lambda env: env[name]
    value = term.value
    return lambda env: value


def _atom_checker(atom, corpus, derived):
    """Ground-membership closure for one atom."""
    pred = atom.pred
    getters = [_getter(a) for a in atom.args]

    if pred in ("token", "lemma", "postag"):
        field = {"token": "surface", "lemma": "lemma", "postag": "tag"}[pred]
        g0, g1 = getters

        def check(env):
            tok = corpus.token_at(g0(env))
            return tok is not None and getattr(tok, field) == g1(env)
        return check

    if pred == "str2span":
        g0, g1 = getters

        def check(env):
            span = g1(env)
            return _is_span(corpus, span) and \
                corpus.span_surface(span) == g0(env)
        return check

    if pred == "span2pos":
        g0, g1 = getters

        def check(env):
            span, p = g0(env), g1(env)
            if not _is_span(corpus, span) or len(p) != 2:
                return False
            return p[0] == span[0] and span[1] <= p[1] <= span[2]
        return check

    if pred == "tokenBefore":
        g0, g1 = getters
        return lambda env: (lambda a, b: a[0] == b[0] and a[1] < b[1])(
            g0(env), g1(env))

    if pred == "sameSentence":
        g0, g1 = getters
        return lambda env: g0(env)[0] == g1(env)[0]

    if pred == "isCapitalized":
        g0 = getters[0]

        def check(env):
            tok = corpus.token_at(g0(env))
            return tok is not None and tok.surface[:1].isupper()
        return check

    if pred == "headOf":
        g0, g1 = getters

        def check(env):
            span = g0(env)
            return _is_span(corpus, span) and \
                corpus.head_of_span(span) == g1(env)
        return check

    if pred == "corefSpan":
        pairs = set(corpus.coref_pairs())
        g0, g1 = getters
        return lambda env: (g0(env), g1(env)) in pairs

    if pred == "inCluster":
        rows = set(corpus.cluster_rows())
        g0, g1 = getters
        return lambda env: (g0(env), g1(env)) in rows

    if pred in derived:
        rows = derived[pred]
        return lambda env: tuple(g(env) for g in getters) in rows

    if len(atom.args) == 2:  # dependency label
        pairs = set(corpus.dep_pairs(pred))
        g0, g1 = getters
        return lambda env: (g0(env), g1(env)) in pairs

    if len(atom.args) == 1:  # entity type
        heads = corpus.entity_head_positions(pred)
        g0 = getters[0]
        return lambda env: g0(env) in heads

    raise AssertionError(f"oracle cannot interpret predicate {pred!r}")


def _checker(formula, corpus, derived, domains, var_types):
    if isinstance(formula, Atom):
        return _atom_checker(formula, corpus, derived)
    if isinstance(formula, Compare):
        op = _CMP[formula.op]
        gl, gr = _getter(formula.left), _getter(formula.right)
        return lambda env: op(gl(env), gr(env))
    if isinstance(formula, And):
        checks = [_checker(p, corpus, derived, domains, var_types)
                  for p in formula.parts]
        return lambda env: all(c(env) for c in checks)
    if isinstance(formula, Or):
        checks = [_checker(p, corpus, derived, domains, var_types)
                  for p in formula.parts]
        return lambda env: any(c(env) for c in checks)
    if isinstance(formula, Not):
        inner = _checker(formula.body, corpus, derived, domains, var_types)
        return lambda env: not inner(env)
    if isinstance(formula, Exists):
        var = formula.var
        domain = domains[var_types[var]]
        inner = _checker(formula.body, corpus, derived, domains, var_types)

        def check(env):
            sentinel = env.pop(var, None)
            hit = False
            for val in domain:
                env[var] = val
                if inner(env):
                    hit = True
                    break
            if sentinel is None:
                env.pop(var, None)
            else:
                env[var] = sentinel
            return hit
        return check
    raise AssertionError(f"oracle cannot evaluate {formula!r}")


def eval_formula(f, env, corpus, derived, domains, var_types) -> bool:
    """Single-shot formula check for a ground assignment."""
    return _checker(f, corpus, derived, domains, var_types)(dict(env))


def _spine_atoms(f):
    if isinstance(f, Atom):
        return [f]
    if isinstance(f, And):
        out = []
        for p in f.parts:
            out.extend(_spine_atoms(p))
        return out
    return []


def atom_holds(corpus, derived, pred, args) -> bool:
    """Membership test for one ground atom (used by targeted tests)."""
    terms = tuple(Const(a) if isinstance(a, (str, int)) and not
                  isinstance(a, bool) else Var(f"_g{i}")
                  for i, a in enumerate(args))
    env = {f"_g{i}": a for i, a in enumerate(args)}
    return _atom_checker(Atom(pred, terms), corpus, derived)(env)


def eval_rule(rule, registry, corpus, derived, domains=None):
    """All head tuples satisfying the body under active-domain semantics.

    ``domains`` overrides the active domains, e.g. to check domain
    independence under extension."""
    typed = infer_types(rule, registry)
    strings, ints = _rule_constants(rule)
    if domains is None:
        domains = active_domains(corpus, strings, ints)
    var_types = typed.var_types
    body_vars = sorted(free_vars(rule.body))
    spine = _spine_atoms(rule.body)

    # Assign variables in an order that lets conjunct checks prune early:
    # prefer variables co-occurring in a spine atom with assigned ones.
    ordered = []
    remaining = list(body_vars)
    while remaining:
        pick = None
        for v in remaining:
            for a in spine:
                vs = set(a.variables())
                if v in vs and (vs - {v}) <= set(ordered) and (vs - {v}):
                    pick = v
                    break
            if pick:
                break
        if pick is None:
            pick = remaining[0]
        ordered.append(pick)
        remaining.remove(pick)

    parts = rule.body.parts if isinstance(rule.body, And) else (rule.body,)
    checks_at = {i: [] for i in range(len(ordered) + 1)}
    for part in parts:
        vs = free_vars(part)
        level = 0 if not vs else max(ordered.index(v) + 1 for v in vs)
        checks_at[level].append(
            _checker(part, corpus, derived, domains, var_types))

    head_getters = [_getter(a) for a in rule.head.args]
    results = set()
    var_domains = [domains[var_types[v]] for v in ordered]

    def recurse(i, env):
        if i == len(ordered):
            results.add(tuple(g(env) for g in head_getters))
            return
        v = ordered[i]
        checks = checks_at[i + 1]
        for val in var_domains[i]:
            env[v] = val
            for check in checks:
                if not check(env):
                    break
            else:
                recurse(i + 1, env)
        del env[v]

    for check in checks_at[0]:
        if not check({}):
            return results
    recurse(0, {})
    return results


def materialize(ruleset, corpus):
    """Stratified grounding of a whole ruleset, in evaluation order."""
    derived = {}
    for pred in ruleset.evaluation_order():
        tuples = set()
        for rule in ruleset.rules_for(pred):
            tuples |= eval_rule(rule, ruleset.registry, corpus, derived)
        derived[pred] = tuples
    return derived
