"""Condition-action rule language: ASTs, parsing, typing and safety.

Rules have the surface form ``head(args) <= body .`` where the body combines
atoms with ``&``, ``|``, ``!``, ``exists v:``/``forall v:`` and the
comparisons ``=``, ``!=``, ``<``, ``<=``.  Unquoted identifiers in argument
position are variables; constants are double-quoted strings or integers.
A rule without ``<=`` and a body is a ground fact.

Parsing normalizes the formula: ``forall`` is rewritten to a negated
existential, negation is pushed through disjunction and comparisons, and
conjunctions/disjunctions are flattened.  Printing emits the normalized form,
so print followed by parse is the identity on ASTs.
"""

from __future__ import annotations

import enum
import hashlib
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union


class VarType(enum.Enum):
    POS = "Pos"
    SPAN = "Span"
    INT = "Int"
    STR = "Str"
    REF = "Ref"

    def __repr__(self):
        return self.value


# -- terms and formulas -------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    value: Union[str, int]

    @property
    def vtype(self) -> VarType:
        return VarType.STR if isinstance(self.value, str) else VarType.INT

    def __str__(self):
        if isinstance(self.value, str):
            return '"' + self.value.replace("\\", "\\\\").replace('"', '\\"') + '"'
        return str(self.value)


Term = Union[Var, Const]


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple

    def variables(self) -> list:
        return [a.name for a in self.args if isinstance(a, Var)]


@dataclass(frozen=True)
class And:
    parts: tuple


@dataclass(frozen=True)
class Or:
    parts: tuple


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


COMPARE_OPS = ("=", "!=", "<", "<=")
_NEGATED_OP = {"=": "!=", "!=": "="}


@dataclass(frozen=True)
class Compare:
    op: str
    left: Term
    right: Term

    def negated(self) -> "Compare":
        if self.op in _NEGATED_OP:
            return Compare(_NEGATED_OP[self.op], self.left, self.right)
        if self.op == "<":  # not(a < b)  <=>  b <= a
            return Compare("<=", self.right, self.left)
        return Compare("<", self.right, self.left)  # not(a <= b) <=> b < a


Formula = Union[Atom, And, Or, Not, Exists, Forall, Compare]

TRUE = And(())  # empty conjunction, the body of a ground fact


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: Formula
    comment: Optional[str] = None

    @property
    def rule_id(self) -> str:
        text = print_rule(self, with_comment=False)
        return hashlib.sha1(text.encode("utf-8")).hexdigest()[:12]

    def is_fact(self) -> bool:
        return self.body == TRUE


# -- registry -----------------------------------------------------------------

KIND_EXTENSIONAL = "builtin-extensional"
KIND_INTENSIONAL = "builtin-intensional"
KIND_DERIVED = "derived"


@dataclass
class PredicateSig:
    name: str
    arg_types: tuple
    kind: str


_P, _S, _I, _T, _R = (VarType.POS, VarType.SPAN, VarType.INT, VarType.STR,
                      VarType.REF)

_CORE_BUILTINS = [
    PredicateSig("token", (_P, _T), KIND_EXTENSIONAL),
    PredicateSig("lemma", (_P, _T), KIND_EXTENSIONAL),
    PredicateSig("postag", (_P, _T), KIND_EXTENSIONAL),
    PredicateSig("corefSpan", (_S, _S), KIND_EXTENSIONAL),
    PredicateSig("inCluster", (_S, _R), KIND_EXTENSIONAL),
    PredicateSig("str2span", (_T, _S), KIND_INTENSIONAL),
    PredicateSig("span2pos", (_S, _P), KIND_INTENSIONAL),
    PredicateSig("tokenBefore", (_P, _P), KIND_INTENSIONAL),
    PredicateSig("sameSentence", (_P, _P), KIND_INTENSIONAL),
    PredicateSig("isCapitalized", (_P,), KIND_INTENSIONAL),
    PredicateSig("headOf", (_S, _P), KIND_INTENSIONAL),
    PredicateSig("actInd", (_P, _P, _T), KIND_INTENSIONAL),
    PredicateSig("passInd", (_P, _P, _T), KIND_INTENSIONAL),
]

_BASE_ENTITY_TYPES = ("person", "organization", "location")

# Dependency labels accepted even when the loaded corpus has no edge with
# that label; collapsed prepositions and conjunctions are matched by prefix.
STANDARD_DEP_LABELS = {
    "nsubj", "nsubjpass", "csubj", "csubjpass", "xsubj", "dobj", "iobj",
    "pobj", "agent", "aux", "auxpass", "cop", "expl", "nn", "amod", "advmod",
    "det", "poss", "possessive", "appos", "rcmod", "partmod", "infmod",
    "xcomp", "ccomp", "acomp", "advcl", "purpcl", "tmod", "num", "number",
    "quantmod", "neg", "prt", "dep", "mark", "complm", "rel", "ref",
    "parataxis", "abbrev", "attr", "mwe", "predet", "preconj", "pcomp",
    "root", "punct",
}
_DEP_PREFIX_RE = re.compile(r"^(prep|prepc|conj)_[a-z_]+$")


class RuleError(ValueError):
    """Base class for rule-language errors."""


class RuleSyntaxError(RuleError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class RuleTypeError(RuleError):
    pass


class RuleSafetyError(RuleError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class PredicateCycleError(RuleError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("cyclic predicate definitions: " + " -> ".join(self.cycle))


class Registry:
    """Predicate signatures: built-ins, corpus-derived and rule-defined.

    Dependency-label and entity-type predicates come from the corpus; unknown
    names matching the standard label inventory (or the ``prep_``/``prepc_``/
    ``conj_`` pattern) resolve lazily to empty dependency relations so that
    portable rule sets parse against any corpus.
    """

    def __init__(self, corpus=None, extra_entity_types: Iterable[str] = ()):
        self._sigs = {s.name: PredicateSig(s.name, s.arg_types, s.kind)
                      for s in _CORE_BUILTINS}
        self.dep_labels = set()
        self.entity_types = set(_BASE_ENTITY_TYPES) | set(extra_entity_types)
        self._derived_order: list = []
        if corpus is not None:
            self.dep_labels.update(corpus.dep_labels())
            self.entity_types.update(corpus.entity_types())
        for lab in self.dep_labels:
            self._sigs[lab] = PredicateSig(lab, (_P, _P), KIND_EXTENSIONAL)
        for et in self.entity_types:
            self._sigs[et] = PredicateSig(et, (_P,), KIND_EXTENSIONAL)

    def clone(self) -> "Registry":
        out = Registry.__new__(Registry)
        out._sigs = {n: PredicateSig(s.name, s.arg_types, s.kind)
                     for n, s in self._sigs.items()}
        out.dep_labels = set(self.dep_labels)
        out.entity_types = set(self.entity_types)
        out._derived_order = list(self._derived_order)
        return out

    def resolve(self, name: str) -> Optional[PredicateSig]:
        sig = self._sigs.get(name)
        if sig is not None:
            return sig
        if name in STANDARD_DEP_LABELS or _DEP_PREFIX_RE.match(name):
            sig = PredicateSig(name, (_P, _P), KIND_EXTENSIONAL)
            self._sigs[name] = sig
            self.dep_labels.add(name)
            return sig
        return None

    def get(self, name: str) -> PredicateSig:
        sig = self.resolve(name)
        if sig is None:
            raise RuleError(f"unknown predicate {name!r}")
        return sig

    def register_derived(self, name: str, arity: int) -> PredicateSig:
        existing = self._sigs.get(name)
        if existing is not None:
            if existing.kind != KIND_DERIVED:
                raise RuleError(f"predicate {name!r} is built-in and cannot "
                                "be redefined")
            if len(existing.arg_types) != arity:
                raise RuleError(
                    f"predicate {name!r} used with arity {arity}, previously "
                    f"{len(existing.arg_types)}")
            return existing
        sig = PredicateSig(name, (None,) * arity, KIND_DERIVED)
        self._sigs[name] = sig
        self._derived_order.append(name)
        return sig

    def is_derived(self, name: str) -> bool:
        sig = self._sigs.get(name)
        return sig is not None and sig.kind == KIND_DERIVED

    def derived_names(self) -> list:
        return list(self._derived_order)

    def is_entity_type(self, name: str) -> bool:
        return name in self.entity_types

    def is_dep_label(self, name: str) -> bool:
        return name in self.dep_labels


# -- tokenizer ---------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<int>-?\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<arrow><=(?![=<]))
  | (?P<op>!=|<=|<|=|&|\||!|\(|\)|,|:|\.)
""", re.VERBOSE)

_KEYWORDS = {"exists", "forall"}


@dataclass
class _Tok:
    kind: str
    value: str
    line: int
    col: int


def _tokenize(text: str) -> list:
    toks = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise RuleSyntaxError(f"unexpected character {text[i]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        if kind not in ("ws", "comment"):
            toks.append(_Tok(kind, value, line, col))
        elif kind == "comment":
            toks.append(_Tok("comment", value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            col = len(value) - value.rfind("\n")
        else:
            col += len(value)
        i = m.end()
    toks.append(_Tok("eof", "", line, col))
    return toks


def _unquote(raw: str) -> str:
    body = raw[1:-1]
    return body.replace('\\"', '"').replace("\\\\", "\\")


# The parser translates body text into raw formulas; rule-level code then
# normalizes and resolves predicates against the registry.
class _Parser:
    def __init__(self, toks: list):
        self.toks = [t for t in toks if t.kind != "comment"]
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, message: str, tok: Optional[_Tok] = None):
        tok = tok or self.peek()
        what = f"got {tok.value!r}" if tok.kind != "eof" else "got end of input"
        raise RuleSyntaxError(f"{message}, {what}", tok.line, tok.col)

    def expect(self, value: str) -> _Tok:
        tok = self.peek()
        if tok.value != value or tok.kind == "string":
            self.error(f"expected {value!r}")
        return self.next()

    def at_end(self) -> bool:
        return self.peek().kind == "eof"

    # rule := atom ( "<=" formula )? "."?
    def parse_rule(self) -> Rule:
        head = self.parse_atom()
        tok = self.peek()
        if tok.kind == "arrow":
            self.next()
            body = self.parse_formula()
        else:
            body = TRUE
        if self.peek().value == ".":
            self.next()
        return Rule(head, body)

    def parse_atom(self) -> Atom:
        tok = self.peek()
        if tok.kind != "ident":
            self.error("expected a predicate name")
        if tok.value in _KEYWORDS:
            self.error("quantifier keyword cannot be used as a predicate")
        name = self.next().value
        self.expect("(")
        args = [self.parse_term()]
        while self.peek().value == ",":
            self.next()
            args.append(self.parse_term())
        self.expect(")")
        return Atom(name, tuple(args))

    def parse_term(self) -> Term:
        tok = self.peek()
        if tok.kind == "ident":
            if tok.value in _KEYWORDS:
                self.error("quantifier keyword cannot be used as a variable")
            return Var(self.next().value)
        if tok.kind == "string":
            return Const(_unquote(self.next().value))
        if tok.kind == "int":
            return Const(int(self.next().value))
        self.error("expected a variable or constant")

    # formula := quantified | disjunction
    def parse_formula(self) -> Formula:
        tok = self.peek()
        if tok.kind == "ident" and tok.value in _KEYWORDS:
            return self.parse_quantified()
        return self.parse_disjunction()

    def parse_quantified(self) -> Formula:
        kw = self.next().value
        var_tok = self.peek()
        if var_tok.kind != "ident" or var_tok.value in _KEYWORDS:
            self.error("expected a quantified variable")
        var = self.next().value
        self.expect(":")
        body = self.parse_formula()
        return Exists(var, body) if kw == "exists" else Forall(var, body)

    def parse_disjunction(self) -> Formula:
        parts = [self.parse_conjunction()]
        while self.peek().value == "|" and self.peek().kind == "op":
            self.next()
            parts.append(self.parse_conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def parse_conjunction(self) -> Formula:
        parts = [self.parse_unary()]
        while self.peek().value == "&" and self.peek().kind == "op":
            self.next()
            parts.append(self.parse_unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def parse_unary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "op" and tok.value == "!":
            self.next()
            return Not(self.parse_unary())
        if tok.kind == "op" and tok.value == "(":
            self.next()
            inner = self.parse_formula()
            self.expect(")")
            return inner
        if tok.kind == "ident" and tok.value in _KEYWORDS:
            return self.parse_quantified()
        if tok.kind == "ident" and self.toks[self.i + 1].value == "(" \
                and self.toks[self.i + 1].kind == "op":
            return self.parse_atom()
        # comparison: term op term
        left = self.parse_term()
        op_tok = self.peek()
        if op_tok.value not in COMPARE_OPS or op_tok.kind == "string":
            self.error("expected a comparison operator")
        op = self.next().value
        right = self.parse_term()
        return Compare(op, left, right)


# -- normalization -------------------------------------------------------------


def free_vars(f: Formula) -> set:
    if isinstance(f, Atom):
        return set(f.variables())
    if isinstance(f, Compare):
        out = set()
        if isinstance(f.left, Var):
            out.add(f.left.name)
        if isinstance(f.right, Var):
            out.add(f.right.name)
        return out
    if isinstance(f, (And, Or)):
        out = set()
        for p in f.parts:
            out |= free_vars(p)
        return out
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, (Exists, Forall)):
        return free_vars(f.body) - {f.var}
    raise TypeError(f"not a formula: {f!r}")


def _rename(f: Formula, mapping: dict) -> Formula:
    def term(t):
        return Var(mapping[t.name]) if isinstance(t, Var) and t.name in mapping else t

    if isinstance(f, Atom):
        return Atom(f.pred, tuple(term(a) for a in f.args))
    if isinstance(f, Compare):
        return Compare(f.op, term(f.left), term(f.right))
    if isinstance(f, And):
        return And(tuple(_rename(p, mapping) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(_rename(p, mapping) for p in f.parts))
    if isinstance(f, Not):
        return Not(_rename(f.body, mapping))
    if isinstance(f, (Exists, Forall)):
        inner = {k: v for k, v in mapping.items() if k != f.var}
        return type(f)(f.var, _rename(f.body, inner))
    raise TypeError(f"not a formula: {f!r}")


def normalize(f: Formula, used_names: Optional[set] = None) -> Formula:
    """Rewrite ``forall``, push negation through ``|``/``!``/comparisons,
    flatten nested conjunctions and disjunctions, and rename quantified
    variables that collide with names already in use."""
    if used_names is None:
        used_names = set(free_vars(f))

    def fresh(base: str) -> str:
        if base not in used_names:
            used_names.add(base)
            return base
        n = 1
        while f"{base}_{n}" in used_names:
            n += 1
        name = f"{base}_{n}"
        used_names.add(name)
        return name

    def walk(node: Formula) -> Formula:
        if isinstance(node, (Atom, Compare)):
            return node
        if isinstance(node, And):
            parts = []
            for p in node.parts:
                q = walk(p)
                parts.extend(q.parts if isinstance(q, And) else [q])
            return parts[0] if len(parts) == 1 else And(tuple(parts))
        if isinstance(node, Or):
            parts = []
            for p in node.parts:
                q = walk(p)
                parts.extend(q.parts if isinstance(q, Or) else [q])
            return parts[0] if len(parts) == 1 else Or(tuple(parts))
        if isinstance(node, Forall):
            return walk(Not(Exists(node.var, Not(node.body))))
        if isinstance(node, Exists):
            name = fresh(node.var)
            body = node.body if name == node.var else _rename(
                node.body, {node.var: name})
            return Exists(name, walk(body))
        if isinstance(node, Not):
            inner = node.body
            if isinstance(inner, Not):
                return walk(inner.body)
            if isinstance(inner, Compare):
                return inner.negated()
            if isinstance(inner, Or):
                return walk(And(tuple(Not(p) for p in inner.parts)))
            if isinstance(inner, Forall):
                return walk(Exists(inner.var, Not(inner.body)))
            return Not(walk(inner))
        raise TypeError(f"not a formula: {node!r}")

    return walk(f)


# -- printing ------------------------------------------------------------------


def print_term(t: Term) -> str:
    return str(t)


def print_atom(a: Atom) -> str:
    return f"{a.pred}({', '.join(print_term(x) for x in a.args)})"


def print_formula(f: Formula) -> str:
    return _print(f, 0)


# precedence levels: 0 formula (quantifier scope), 1 disjunct, 2 conjunct.
def _print(f: Formula, level: int) -> str:
    if isinstance(f, Atom):
        return print_atom(f)
    if isinstance(f, Compare):
        s = f"{print_term(f.left)} {f.op} {print_term(f.right)}"
        return f"({s})" if level >= 2 else s
    if isinstance(f, Not):
        inner = _print(f.body, 3)
        if not isinstance(f.body, Atom):
            inner = f"({_print(f.body, 0)})"
        return "!" + inner
    if isinstance(f, Exists):
        return f"(exists {f.var}: {_print(f.body, 0)})"
    if isinstance(f, And):
        s = " & ".join(_print(p, 2) for p in f.parts)
        return f"({s})" if level >= 3 else s
    if isinstance(f, Or):
        s = " | ".join(_print(p, 1) for p in f.parts)
        return f"({s})" if level >= 2 else s
    raise TypeError(f"not a printable formula: {f!r}")


def print_rule(rule: Rule, with_comment: bool = True) -> str:
    lines = []
    if with_comment and rule.comment:
        lines.append(f"# {rule.comment}")
    if rule.is_fact():
        lines.append(f"{print_atom(rule.head)}.")
    else:
        lines.append(f"{print_atom(rule.head)} <= {print_formula(rule.body)}.")
    return "\n".join(lines)


# -- parsing entry points --------------------------------------------------------


def _resolve_atoms(f: Formula, registry: Registry):
    """Arity-check every body atom against the registry."""
    if isinstance(f, Atom):
        sig = registry.resolve(f.pred)
        if sig is None:
            raise RuleError(f"unknown predicate {f.pred!r} in rule body")
        if len(sig.arg_types) != len(f.args):
            raise RuleError(
                f"predicate {f.pred!r} takes {len(sig.arg_types)} arguments, "
                f"got {len(f.args)}")
    elif isinstance(f, (And, Or)):
        for p in f.parts:
            _resolve_atoms(p, registry)
    elif isinstance(f, Not):
        _resolve_atoms(f.body, registry)
    elif isinstance(f, Exists):
        _resolve_atoms(f.body, registry)


def parse_rule(text: str, registry: Registry, comment: Optional[str] = None) -> Rule:
    """Parse one rule, normalize its body, and resolve predicates.

    The head predicate auto-registers as derived with the observed arity;
    body predicates must already be known.
    """
    parser = _Parser(_tokenize(text))
    raw = parser.parse_rule()
    if not parser.at_end():
        parser.error("unexpected trailing input")
    body = normalize(raw.body, used_names=set(free_vars(raw.body))
                     | set(raw.head.variables()))
    rule = Rule(raw.head, body, comment=comment)
    registry.register_derived(rule.head.pred, len(rule.head.args))
    _resolve_atoms(rule.body, registry)
    for v in rule.head.args:
        if isinstance(v, Var) and v.name not in free_vars(rule.body) \
                and not rule.is_fact():
            # Reported again by check_safety; kept permissive here so that
            # safety diagnostics carry the variable name.
            pass
    return rule


def parse_ruleset_text(text: str, registry: Registry) -> list:
    """Parse a rule file: rules separated by ``.``, with ``#`` comment lines.

    A comment line directly above a rule becomes that rule's comment.
    """
    toks = _tokenize(text)
    rules = []
    pending_comment = None
    parser = _Parser(toks)
    comments = {(t.line): t for t in toks if t.kind == "comment"}
    next_rule_line = None
    while not parser.at_end():
        start = parser.peek()
        # attach the closest comment line immediately above the rule start
        cand = comments.get(start.line - 1)
        pending_comment = cand.value.lstrip("#").strip() if cand else None
        rule = parser.parse_rule()
        rules.append(Rule(rule.head, rule.body, comment=pending_comment))
        registry.register_derived(rule.head.pred, len(rule.head.args))
        _resolve_atoms(rule.body, registry)
        next_rule_line = None
    return rules


# -- type inference ---------------------------------------------------------------


@dataclass
class TypedRule:
    rule: Rule
    var_types: dict


class _TypeEnv:
    """Union-find over variables with attached concrete types."""

    def __init__(self):
        self.parent: dict = {}
        self.types: dict = {}
        self.witness: dict = {}

    def find(self, v: str) -> str:
        root = v
        while self.parent.get(root, root) != root:
            root = self.parent[root]
        while self.parent.get(v, v) != v:
            self.parent[v], v = root, self.parent[v]
        return root

    def assign(self, v: str, vtype: VarType, where: str):
        root = self.find(v)
        prev = self.types.get(root)
        if prev is None:
            self.types[root] = vtype
            self.witness[root] = where
        elif prev != vtype:
            raise RuleTypeError(
                f"variable {v!r} used as {prev.value} in "
                f"{self.witness[root]} and as {vtype.value} in {where}")

    def union(self, a: str, b: str, where: str):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        ta, tb = self.types.get(ra), self.types.get(rb)
        if ta is not None and tb is not None and ta != tb:
            raise RuleTypeError(
                f"variable {a!r} ({ta.value}, {self.witness[ra]}) compared "
                f"with {b!r} ({tb.value}, {where})")
        self.parent[rb] = ra
        if ta is None and tb is not None:
            self.types[ra] = tb
            self.witness[ra] = self.witness.get(rb, where)


def infer_types(rule: Rule, registry: Registry) -> TypedRule:
    """Assign exactly one type to every variable, or raise naming the
    variable and the conflicting uses."""
    env = _TypeEnv()
    comparisons = []

    def visit(f: Formula):
        if isinstance(f, Atom):
            sig = registry.get(f.pred)
            where = print_atom(f)
            for arg, at in zip(f.args, sig.arg_types):
                if isinstance(arg, Var):
                    if at is not None:
                        env.assign(arg.name, at, where)
                elif at is not None and arg.vtype != at:
                    raise RuleTypeError(
                        f"constant {arg} is {arg.vtype.value} but {f.pred!r} "
                        f"expects {at.value} in {where}")
        elif isinstance(f, Compare):
            comparisons.append(f)
        elif isinstance(f, (And, Or)):
            for p in f.parts:
                visit(p)
        elif isinstance(f, (Not, Exists)):
            visit(f.body)

    head_sig = registry.get(rule.head.pred)
    visit(rule.head)
    visit(rule.body)
    for c in comparisons:
        where = f"{print_term(c.left)} {c.op} {print_term(c.right)}"
        if isinstance(c.left, Var) and isinstance(c.right, Var):
            env.union(c.left.name, c.right.name, where)
        elif isinstance(c.left, Var):
            env.assign(c.left.name, c.right.vtype, where)
        elif isinstance(c.right, Var):
            env.assign(c.right.name, c.left.vtype, where)

    var_types = {}
    for v in _all_vars(rule):
        root = env.find(v)
        t = env.types.get(root)
        if t is None:
            raise RuleTypeError(f"cannot infer a type for variable {v!r}")
        var_types[v] = t

    # Propagate head types onto a derived predicate the first time they are
    # known; later rules for the same predicate must agree.
    new_types = []
    for arg, at in zip(rule.head.args, head_sig.arg_types):
        inferred = var_types[arg.name] if isinstance(arg, Var) else arg.vtype
        if at is not None and at != inferred:
            raise RuleTypeError(
                f"head argument {print_term(arg)} of {rule.head.pred!r} is "
                f"{inferred.value} but earlier rules use {at.value}")
        new_types.append(inferred)
    if head_sig.kind == KIND_DERIVED:
        head_sig.arg_types = tuple(new_types)
    return TypedRule(rule, var_types)


def _all_vars(rule: Rule) -> list:
    seen = []

    def visit(f):
        if isinstance(f, Atom):
            for v in f.variables():
                if v not in seen:
                    seen.append(v)
        elif isinstance(f, Compare):
            for t in (f.left, f.right):
                if isinstance(t, Var) and t.name not in seen:
                    seen.append(t.name)
        elif isinstance(f, (And, Or)):
            for p in f.parts:
                visit(p)
        elif isinstance(f, (Not, Exists)):
            visit(f.body)

    visit(rule.head)
    visit(rule.body)
    return seen


# -- safety ------------------------------------------------------------------------


@dataclass(frozen=True)
class SafetyViolation:
    variable: str
    reason: str

    def __str__(self):
        return f"variable {self.variable!r}: {self.reason}"


def _bound_vars(f: Formula) -> set:
    """Variables bound by a positive occurrence of a finite predicate."""
    if isinstance(f, Atom):
        return set(f.variables())
    if isinstance(f, And):
        out = set()
        for p in f.parts:
            out |= _bound_vars(p)
        return out
    if isinstance(f, Or):
        sets = [_bound_vars(p) for p in f.parts]
        out = sets[0]
        for s in sets[1:]:
            out &= s
        return out
    if isinstance(f, Exists):
        return _bound_vars(f.body) - {f.var}
    return set()  # Not, Compare


def check_safety(rule: Rule, registry: Optional[Registry] = None) -> list:
    """Range-restriction check on a normalized rule.

    Returns a list of violations (empty when the rule is safe).  Every head
    variable, every variable of a comparison and every variable free in a
    negated subformula must be positively bound within its own scope, where
    scopes are the rule body, quantifier bodies, negation bodies and
    disjunction branches.  Disjunction branches must use identical variable
    sets.
    """
    violations = []

    def check_scope(f: Formula):
        parts = f.parts if isinstance(f, And) else (f,)
        bound = set()
        for p in parts:
            bound |= _bound_vars(p)
        for p in parts:
            if isinstance(p, Compare):
                for t in (p.left, p.right):
                    if isinstance(t, Var) and t.name not in bound:
                        violations.append(SafetyViolation(
                            t.name,
                            f"used in comparison "
                            f"{print_term(p.left)} {p.op} {print_term(p.right)} "
                            "without a positive binding in the same scope"))
            elif isinstance(p, Not):
                for v in sorted(free_vars(p.body)):
                    if v not in bound:
                        violations.append(SafetyViolation(
                            v, "free in a negated subformula without a "
                               "positive binding in the same scope"))
                check_scope(p.body)
            elif isinstance(p, Or):
                branch_vars = [free_vars(br) for br in p.parts]
                union = set().union(*branch_vars)
                for br_vars in branch_vars:
                    for v in sorted(union - br_vars):
                        violations.append(SafetyViolation(
                            v, "bound in some but not all disjunction branches"))
                for br in p.parts:
                    check_scope(br)
            elif isinstance(p, Exists):
                if p.var not in free_vars(p.body):
                    violations.append(SafetyViolation(
                        p.var, "quantified variable does not occur in its body"))
                elif p.var not in _bound_vars(p.body):
                    violations.append(SafetyViolation(
                        p.var, "quantified variable has no positive binding"))
                check_scope(p.body)
            elif isinstance(p, And):
                check_scope(p)

    check_scope(rule.body)
    body_bound = _bound_vars(rule.body)
    for arg in rule.head.args:
        if isinstance(arg, Var) and arg.name not in body_bound:
            violations.append(SafetyViolation(
                arg.name, "head variable is not positively bound in the body"))
    # deterministic order, deduplicated
    seen = set()
    out = []
    for v in violations:
        key = (v.variable, v.reason)
        if key not in seen:
            seen.add(key)
            out.append(v)
    return out


def require_safe(rule: Rule, registry: Optional[Registry] = None) -> Rule:
    violations = check_safety(rule, registry)
    if violations:
        raise RuleSafetyError(violations)
    return rule


# -- rulesets ---------------------------------------------------------------------


def _body_predicates(f: Formula, acc: set):
    if isinstance(f, Atom):
        acc.add(f.pred)
    elif isinstance(f, (And, Or)):
        for p in f.parts:
            _body_predicates(p, acc)
    elif isinstance(f, (Not, Exists)):
        _body_predicates(f.body, acc)


def rule_body_predicates(rule: Rule) -> set:
    acc = set()
    _body_predicates(rule.body, acc)
    return acc


class Ruleset:
    """An ordered, immutable collection of rules plus its registry.

    Mutation helpers return a new version; the predicate dependency graph is
    kept acyclic.
    """

    def __init__(self, rules: Iterable[Rule], registry: Registry):
        self.rules = tuple(rules)
        self.registry = registry
        self._order = predicate_graph(self)

    @classmethod
    def empty(cls, base_registry: Registry) -> "Ruleset":
        return cls((), base_registry.clone())

    @classmethod
    def from_text(cls, text: str, base_registry: Registry) -> "Ruleset":
        registry = base_registry.clone()
        rules = []
        for raw in parse_ruleset_text(text, registry):
            body = normalize(raw.body, used_names=set(free_vars(raw.body))
                             | {a.name for a in raw.head.args
                                if isinstance(a, Var)})
            rule = Rule(raw.head, body, comment=raw.comment)
            infer_types(rule, registry)
            require_safe(rule, registry)
            rules.append(rule)
        return cls(rules, registry)

    def to_text(self) -> str:
        return "\n".join(print_rule(r) for r in self.rules) + ("\n" if self.rules else "")

    def with_rule(self, text_or_rule, comment: Optional[str] = None) -> "Ruleset":
        registry = self.registry.clone()
        if isinstance(text_or_rule, Rule):
            rule = text_or_rule
            registry.register_derived(rule.head.pred, len(rule.head.args))
            _resolve_atoms(rule.body, registry)
        else:
            rule = parse_rule(text_or_rule, registry, comment=comment)
        infer_types(rule, registry)
        require_safe(rule, registry)
        if any(r.rule_id == rule.rule_id for r in self.rules):
            return self  # identical rule already present
        return Ruleset(self.rules + (rule,), registry)

    def without_rule(self, rule_id: str) -> "Ruleset":
        kept = tuple(r for r in self.rules if r.rule_id != rule_id)
        if len(kept) == len(self.rules):
            raise RuleError(f"no rule with id {rule_id!r}")
        registry = self.registry.clone()
        return Ruleset(kept, registry)

    def rules_for(self, pred: str) -> list:
        return [r for r in self.rules if r.head.pred == pred]

    def rule_by_id(self, rule_id: str) -> Rule:
        for r in self.rules:
            if r.rule_id == rule_id:
                return r
        raise RuleError(f"no rule with id {rule_id!r}")

    def head_predicates(self) -> list:
        out = []
        for r in self.rules:
            if r.head.pred not in out:
                out.append(r.head.pred)
        return out

    def evaluation_order(self) -> list:
        return list(self._order)

    def version_id(self) -> str:
        h = hashlib.sha1()
        for r in self.rules:
            h.update(r.rule_id.encode())
        return h.hexdigest()[:12]


def predicate_graph(ruleset: Ruleset) -> list:
    """Topological evaluation order of the derived predicates.

    Every predicate precedes its users; ties break by first-definition order.
    Raises :class:`PredicateCycleError` on recursion.
    """
    heads = ruleset.head_predicates()
    index = {p: i for i, p in enumerate(heads)}
    deps = {p: set() for p in heads}
    for r in ruleset.rules:
        for used in rule_body_predicates(r):
            if used in deps and used != r.head.pred:
                deps[r.head.pred].add(used)
            elif used == r.head.pred:
                raise PredicateCycleError([r.head.pred, r.head.pred])
    order = []
    done = set()
    temp = set()

    def visit(p, stack):
        if p in done:
            return
        if p in temp:
            cycle = stack[stack.index(p):] + [p]
            raise PredicateCycleError(cycle)
        temp.add(p)
        for q in sorted(deps[p], key=lambda x: index[x]):
            visit(q, stack + [p])
        temp.discard(p)
        done.add(p)
        order.append(p)

    for p in heads:
        visit(p, [])
    return order
