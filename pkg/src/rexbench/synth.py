"""Seeded synthetic corpora and rule workloads.

Used by the benchmark CLI and by tests that compare the engine against a
brute-force oracle on randomly generated inputs.  Everything is driven by an
explicit ``random.Random`` so runs are reproducible.
"""

from __future__ import annotations

import random

from .corpus import Corpus, CorpusBuilder, build_indices
from .rules import (And, Atom, Compare, Const, Exists, Not, Or, Registry,
                    Rule, Var, check_safety, free_vars, infer_types)

_SMALL_VOCAB = [
    "alice", "bob", "carol", "dave", "eve", "shot", "met", "saw", "hired",
    "fled", "sued", "paid", "city", "bank", "judge", "trial", "case",
]
_SMALL_TAGS = ["NN", "NNP", "VBD", "DT", "IN"]
_SMALL_LABELS = ["nsubj", "dobj", "nn", "amod", "prep_of", "prep_in", "poss"]


def random_corpus(rng: random.Random, sentences: int = 30,
                  max_tokens: int = 6) -> Corpus:
    """A small random corpus with tokens, a random dependency forest, a few
    entity mentions and occasional coreference clusters."""
    builder = CorpusBuilder()
    builder.start_document("synthetic")
    cluster_id = 0
    for _ in range(sentences):
        n = rng.randint(2, max_tokens)
        words = [rng.choice(_SMALL_VOCAB) for _ in range(n)]
        if rng.random() < 0.5:
            idx = rng.randrange(n)
            words[idx] = words[idx].capitalize()
        tokens = [(w, w.lower(), rng.choice(_SMALL_TAGS)) for w in words]
        deps = []
        for d in range(2, n + 1):
            if rng.random() < 0.8:
                h = rng.randint(1, d - 1)
                deps.append((rng.choice(_SMALL_LABELS), h, d))
        ners = []
        if rng.random() < 0.6:
            start = rng.randint(1, n)
            end = min(n, start + rng.choice([0, 0, 1]))
            ners.append((rng.choice(["person", "organization"]), start, end))
        corefs = []
        if rng.random() < 0.15 and n >= 2:
            corefs.append((cluster_id, [(1, 1), (2, 2)]))
            cluster_id += 1
        builder.add_sentence(tokens, deps, ners, corefs)
    return build_indices(builder.finish())


class RandomRuleFactory:
    """Random safe rules: a positive conjunctive spine plus optional
    comparisons, negations, disjunctions and existentials (safe by
    construction)."""

    def __init__(self, corpus: Corpus, rng: random.Random):
        self.corpus = corpus
        self.rng = rng
        self.labels = [l for l in corpus.dep_labels()] or ["nsubj"]
        self.words = sorted({t.surface for t in corpus.iter_tokens()})
        self.etypes = corpus.entity_types()
        self.counter = 0

    def _word(self):
        return self.rng.choice(self.words)

    def _label(self):
        return self.rng.choice(self.labels)

    def next_head_name(self) -> str:
        self.counter += 1
        return f"q{self.counter}"

    def spine(self, variables):
        """Chain of dependency atoms binding every variable."""
        atoms = [Atom(self._label(), (Var(variables[0]), Var(variables[1])))]
        for i in range(2, len(variables)):
            src = self.rng.choice(variables[:i])
            if self.rng.random() < 0.5:
                atoms.append(Atom(self._label(), (Var(src), Var(variables[i]))))
            else:
                atoms.append(Atom(self._label(), (Var(variables[i]), Var(src))))
        return atoms

    def extras(self, variables, depth: int):
        rng = self.rng
        out = []
        v = lambda: Var(rng.choice(variables))
        roll = rng.random()
        if roll < 0.2:
            out.append(Atom("token", (v(), Const(self._word()))))
        elif roll < 0.35 and self.etypes:
            out.append(Atom(rng.choice(self.etypes), (v(),)))
        elif roll < 0.5:
            out.append(Compare(rng.choice(["!=", "<", "<="]), v(), v()))
        elif roll < 0.65:
            # negation, self-contained or correlated on bound variables
            if rng.random() < 0.5:
                out.append(Not(Atom(self._label(), (v(), v()))))
            else:
                out.append(Not(Exists("nx", Atom(self._label(),
                                                 (v(), Var("nx"))))))
        elif roll < 0.8:
            shared = rng.choice(variables)
            left = And((Atom(self._label(), (Var(shared), Var("ox"))),
                        Atom("token", (Var("ox"), Const(self._word())))))
            right = And((Atom(self._label(), (Var("ox"), Var(shared))),
                         Atom("isCapitalized", (Var("ox"),))))
            out.append(Or((left, right)))
        elif roll < 0.9:
            out.append(Exists("ex", Atom(self._label(), (v(), Var("ex")))))
        else:
            out.append(Atom("isCapitalized", (v(),)))
        if depth > 1 and rng.random() < 0.4:
            out.extend(self.extras(variables, depth - 1))
        return out

    def safe_rule(self, max_vars: int = 4, depth: int = 3) -> Rule:
        rng = self.rng
        nvars = rng.randint(2, max_vars)
        variables = [f"v{i}" for i in range(nvars)]
        parts = self.spine(variables)
        for _ in range(rng.randint(0, 2)):
            parts.extend(self.extras(variables, depth - 1))
        head_vars = rng.sample(variables, k=min(2, len(variables)))
        rule = Rule(Atom(self.next_head_name(),
                         tuple(Var(h) for h in head_vars)),
                    And(tuple(parts)))
        from .rules import normalize
        rule = Rule(rule.head, normalize(rule.body), rule.comment)
        return rule

    def unsafe_rule(self) -> Rule:
        """A rule broken in one of the classic ways; returns (rule, variable)
        via rule.comment carrying the offending variable name."""
        rng = self.rng
        base = self.safe_rule(max_vars=3, depth=1)
        mode = rng.choice(["head", "neg", "or", "forall", "cmp"])
        if mode == "head":
            head = Atom(base.head.pred, base.head.args + (Var("zz"),))
            return Rule(head, base.body, comment="zz")
        if mode == "neg":
            body = And((Not(Atom(self._label(), (Var("zz"), Var("zz2")))),)
                       + (base.body.parts if isinstance(base.body, And)
                          else (base.body,)))
            return Rule(base.head, body, comment="zz")
        if mode == "or":
            first = base.body.parts[0] if isinstance(base.body, And) else base.body
            some_var = sorted(free_vars(first))[0]
            body = Or((first,
                       Atom(self._label(), (Var(some_var), Var("zz")))))
            return Rule(Atom(base.head.pred[:-1] + "o", (Var(some_var),)),
                        body, comment="zz")
        if mode == "cmp":
            body = And(((Compare("!=", Var("zz"), Var("zz")),)
                        + (base.body.parts if isinstance(base.body, And)
                           else (base.body,))))
            return Rule(base.head, body, comment="zz")
        # forall whose matrix is not range restricted
        from .rules import Forall, normalize
        first = base.body.parts[0] if isinstance(base.body, And) else base.body
        some_var = sorted(free_vars(first))[0]
        body = And((first,
                    Forall("zz", Atom(self._label(),
                                      (Var(some_var), Var("zz"))))))
        return Rule(base.head, normalize(body), comment="zz")


# -- benchmark corpus -----------------------------------------------------------

_BENCH_PERSONS = [
    "Adams", "Baker", "Clark", "Davis", "Evans", "Foster", "Garcia",
    "Harris", "Irwin", "Jones", "Keller", "Lopez", "Miller", "Nolan",
    "Owens", "Parker", "Quinn", "Rivera", "Smith", "Turner", "Walker",
]
_BENCH_VERBS = [
    "murdered", "killed", "assassinated", "shot", "stabbed", "slew",
    "attacked", "married", "hired", "founded", "sued", "met", "praised",
    "blamed", "accused", "fired", "backed", "visited", "advised", "paid",
]
_BENCH_FILLER = [
    "yesterday", "reportedly", "quietly", "again", "downtown", "abroad",
    "twice", "recently", "allegedly", "later", "today", "publicly",
]
_BENCH_NOUNS = [
    "murder", "case", "trial", "verdict", "wedding", "company", "deal",
    "report", "inquiry", "meeting", "campaign", "dispute",
]


_BENCH_FIRST = [
    "Alan", "Brenda", "Carl", "Diane", "Edgar", "Fiona", "Gavin", "Helen",
    "Ivan", "Julia", "Kevin", "Laura", "Marcus", "Nina", "Oscar", "Paula",
    "Ralph", "Sonia", "Thomas", "Ursula",
]


def benchmark_corpus(rng: random.Random, sentences: int = 100_000) -> Corpus:
    """A large subject-verb-object corpus over two-token person names.

    A small set of recurring argument pairs is planted so that bootstrap
    iterations find shared pairs, while most sentences use pairs drawn from
    the full name pool (20 first x 21 last names)."""
    builder = CorpusBuilder()
    names = [(f, l) for f in _BENCH_FIRST for l in _BENCH_PERSONS]
    famous = [tuple(rng.sample(range(len(names)), 2)) for _ in range(200)]
    verbs = _BENCH_VERBS
    filler = _BENCH_FILLER
    nouns = _BENCH_NOUNS
    doc = -1
    for i in range(sentences):
        if i % 40 == 0:
            doc += 1
            builder.start_document(f"doc{doc}")
        if rng.random() < 0.3:
            si, oi = rng.choice(famous)
        else:
            si = rng.randrange(len(names))
            oi = rng.randrange(len(names))
        (sf, sl), (of_, ol) = names[si], names[oi]
        verb = rng.choice(verbs) if rng.random() < 0.4 else rng.choice(nouns)
        is_verb = verb in verbs
        mid = rng.choice(filler)
        if is_verb:
            tokens = [(sf, sf.lower(), "NNP"), (sl, sl.lower(), "NNP"),
                      (mid, mid, "RB"), (verb, verb, "VBD"),
                      (of_, of_.lower(), "NNP"), (ol, ol.lower(), "NNP"),
                      (".", ".", ".")]
            deps = [("nn", 2, 1), ("nsubj", 4, 2), ("advmod", 4, 3),
                    ("dobj", 4, 6), ("nn", 6, 5)]
            ners = [("person", 1, 2), ("person", 5, 6)]
            anchor = 4
        else:
            tokens = [("The", "the", "DT"), (verb, verb, "NN"),
                      ("of", "of", "IN"), (of_, of_.lower(), "NNP"),
                      (ol, ol.lower(), "NNP"), ("by", "by", "IN"),
                      (sf, sf.lower(), "NNP"), (sl, sl.lower(), "NNP"),
                      (".", ".", ".")]
            deps = [("det", 2, 1), ("prep_of", 2, 5), ("nn", 5, 4),
                    ("prep_by", 2, 8), ("nn", 8, 7)]
            ners = [("person", 4, 5), ("person", 7, 8)]
            anchor = 2
        extra = rng.randint(0, 3)
        base = len(tokens)
        for k in range(extra):
            w = rng.choice(filler)
            tokens.append((w, w, "RB"))
            deps.append(("advmod", anchor, base + k + 1))
        builder.add_sentence(tokens, deps, ners)
    return build_indices(builder.finish())


def benchmark_rules(rng: random.Random, count: int = 1000) -> list:
    """Rule texts shaped like interactive workloads: lexically anchored
    subject-verb-object patterns with entity constraints, occasional
    negation and composition-style noun patterns."""
    out = []
    for i in range(count):
        verb = rng.choice(_BENCH_VERBS)
        noun = rng.choice(_BENCH_NOUNS)
        kind = i % 5
        if kind == 0:
            out.append(f'r{i}(a,b) <= nsubj(c,a) & dobj(c,b) & '
                       f'token(c,"{verb}")')
        elif kind == 1:
            out.append(f'r{i}(a,b) <= nsubj(c,a) & dobj(c,b) & '
                       f'token(c,"{verb}") & person(a) & person(b)')
        elif kind == 2:
            out.append(f'r{i}(a,b) <= prep_of(c,b) & prep_by(c,a) & '
                       f'token(c,"{noun}")')
        elif kind == 3:
            out.append(f'r{i}(a,b) <= nsubj(c,a) & dobj(c,b) & '
                       f'token(c,"{verb}") & !(exists d: prep_of(c,d))')
        else:
            out.append(f'r{i}(a,b) <= nsubj(c,a) & dobj(c,b) & '
                       f'(token(c,"{verb}") | token(c,"{rng.choice(_BENCH_VERBS)}"))')
    return out
