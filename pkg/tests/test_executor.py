import random

import pytest

from rexbench.corpus import CorpusBuilder, build_indices
from rexbench.executor import (ExecutionError, eval_plan, export_tsv,
                               extractions, incremental_update,
                               materialize_ruleset)
from rexbench.rules import Registry, Ruleset, infer_types, parse_rule
from rexbench.compiler import compile_rule
from rexbench import synth
from tests import oracle
from tests.conftest import KILL_RULESET_TEXT


def test_kill_of_victim_golden(sentence_corpus, kill_ruleset):
    result = materialize_ruleset(kill_ruleset, sentence_corpus)
    assert result.tuples("killOfVictim") == {((0, 7), (0, 9))}
    assert result.tuples("killed") == {((0, 2), (0, 9))}


def test_plan_over_empty_corpus():
    corpus = build_indices(CorpusBuilder().finish())
    reg = Registry(corpus)
    rule = parse_rule("p(a) <= person(a)", reg)
    typed = infer_types(rule, reg)
    compiled = compile_rule(typed, reg)
    assert eval_plan(compiled.plan, corpus).rows == set()


def test_unmaterialized_derived_is_error(sentence_corpus):
    reg = Registry(sentence_corpus)
    reg.register_derived("ghost", 1)
    rule = parse_rule("p(a) <= ghost(a)", reg)
    reg.get("ghost").arg_types = (None,)
    from rexbench.rules import VarType
    reg.get("ghost").arg_types = (VarType.POS,)
    typed = infer_types(rule, reg)
    compiled = compile_rule(typed, reg)
    with pytest.raises(ExecutionError):
        eval_plan(compiled.plan, sentence_corpus, derived={})


def test_empty_ruleset(sentence_corpus):
    rs = Ruleset.empty(Registry(sentence_corpus))
    result = materialize_ruleset(rs, sentence_corpus)
    assert result.by_pred == {}
    assert result.rule_counts == {}


def test_duplicate_tuple_counted_per_rule(sentence_corpus):
    rs = Ruleset.empty(Registry(sentence_corpus))
    rs = rs.with_rule("pair(a,b) <= nsubjpass(c,a) & prep_for(c,b)")
    rs = rs.with_rule('pair(a,b) <= nsubjpass(c,a) & prep_for(c,b) & '
                      'token(c,"sentenced")')
    result = materialize_ruleset(rs, sentence_corpus)
    assert len(result.tuples("pair")) == 1
    for rule in rs.rules:
        assert result.count(rule.rule_id) == 1


def test_rule_order_within_predicate_irrelevant(sentence_corpus):
    reg = Registry(sentence_corpus)
    lines = [l.strip() for l in KILL_RULESET_TEXT.strip().splitlines()]
    swapped = lines[:4] + [lines[5], lines[4]] + lines[6:]
    rs1 = Ruleset.from_text("\n".join(lines), reg)
    rs2 = Ruleset.from_text("\n".join(swapped), Registry(sentence_corpus))
    r1 = materialize_ruleset(rs1, sentence_corpus)
    r2 = materialize_ruleset(rs2, sentence_corpus)
    for pred in ("killNoun", "killOfVictim", "killed"):
        assert r1.tuples(pred) == r2.tuples(pred)


def test_monotone_under_rule_addition(sentence_corpus, kill_ruleset):
    before = materialize_ruleset(kill_ruleset, sentence_corpus)
    extended = kill_ruleset.with_rule(
        'killed(a,b) <= nsubjpass(c,a) & prep_for(c,d) & prep_of(d,b)')
    after = materialize_ruleset(extended, sentence_corpus)
    for pred in before.by_pred:
        assert before.tuples(pred) <= after.tuples(pred)


# -- the central equivalence test -------------------------------------------------


def test_oracle_equivalence_random_rules_small():
    rng = random.Random(2024)
    failures = []
    for trial in range(6):
        corpus = synth.random_corpus(rng, sentences=12, max_tokens=5)
        factory = synth.RandomRuleFactory(corpus, rng)
        reg = Registry(corpus)
        for _ in range(10):
            rule = factory.safe_rule()
            reg.register_derived(rule.head.pred, len(rule.head.args))
            typed = infer_types(rule, reg)
            compiled = compile_rule(typed, reg, stats=corpus.stats(),
                                    greedy=True)
            got = eval_plan(compiled.plan, corpus).rows
            want = oracle.eval_rule(rule, reg, corpus, {})
            if got != want:
                failures.append((trial, rule, got ^ want))
    assert not failures, failures[:2]


def test_oracle_equivalence_stratified_ruleset(sentence_corpus, kill_ruleset):
    engine = materialize_ruleset(kill_ruleset, sentence_corpus)
    ground = oracle.materialize(kill_ruleset, sentence_corpus)
    for pred, rows in ground.items():
        assert engine.tuples(pred) == rows


# -- extractions ----------------------------------------------------------------------


def test_extractions_strings(sentence_corpus, kill_ruleset):
    result = materialize_ruleset(kill_ruleset, sentence_corpus)
    killed = extractions("killed", result, sentence_corpus)
    assert len(killed) == 1
    e = killed[0]
    assert (e.arg1, e.arg2) == ("Williams", "Wright")
    assert e.sentence_id == 0
    assert e.rule_id in {r.rule_id for r in kill_ruleset.rules}
    kov = extractions("killOfVictim", result, sentence_corpus)
    assert [(e.arg1, e.arg2) for e in kov] == [("murder", "Wright")]


def test_extractions_use_covering_mention():
    # Mention-cover oracle: argument positions that head a wider entity
    # mention take the full mention surface.
    from tests.conftest import SENTENCE_TOKENS, SENTENCE_DEPS
    builder = CorpusBuilder()
    builder.start_document("d1")
    builder.add_sentence(SENTENCE_TOKENS, SENTENCE_DEPS,
                         [("person", 1, 2), ("person", 9, 9)])
    corpus = build_indices(builder.finish())
    rs = Ruleset.from_text(KILL_RULESET_TEXT, Registry(corpus))
    result = materialize_ruleset(rs, corpus)
    killed = extractions("killed", result, corpus)
    assert [(e.arg1, e.arg2) for e in killed] == [("Mr. Williams", "Wright")]
    assert killed[0].arg1_span == (0, 1, 2)


def test_extractions_empty_and_arity_errors(sentence_corpus, kill_ruleset):
    result = materialize_ruleset(kill_ruleset, sentence_corpus)
    with pytest.raises(ExecutionError):
        extractions("killNoun", result, sentence_corpus)


def test_export_tsv_format(sentence_corpus, kill_ruleset):
    result = materialize_ruleset(kill_ruleset, sentence_corpus)
    text = export_tsv(extractions("killed", result, sentence_corpus))
    line = text.strip().split("\n")[0].split("\t")
    assert line[0] == "killed"
    assert line[1] == "Williams"
    assert line[2] == "Wright"
    assert line[3] == "d1"
    assert line[4] == "0"
    assert line[5] == "2-2"
    assert line[6] == "9-9"


# -- incremental updates -----------------------------------------------------------------


def test_incremental_equals_full_rebuild(sentence_corpus, kill_ruleset):
    previous = materialize_ruleset(kill_ruleset, sentence_corpus)
    extended = kill_ruleset.with_rule(
        'killed(a,b) <= nsubjpass(c,a) & prep_for(c,d) & prep_of(d,b)')
    inc = incremental_update(extended, sentence_corpus, previous)
    full = materialize_ruleset(extended, sentence_corpus)
    assert inc.by_pred == full.by_pred
    assert inc.rule_counts == full.rule_counts


def test_incremental_remove_last_rule(sentence_corpus, kill_ruleset):
    previous = materialize_ruleset(kill_ruleset, sentence_corpus)
    target = [r for r in kill_ruleset.rules if r.head.pred == "killed"]
    rs = kill_ruleset
    for r in target:
        rs = rs.without_rule(r.rule_id)
    inc = incremental_update(rs, sentence_corpus, previous)
    full = materialize_ruleset(rs, sentence_corpus)
    assert inc.by_pred == full.by_pred
    assert inc.by_pred["killed"] == set()  # rule-less predicate is empty


def test_incremental_only_affected_recomputed(sentence_corpus, kill_ruleset):
    previous = materialize_ruleset(kill_ruleset, sentence_corpus)
    # Adding a killed rule must not recompute killNoun or killOfVictim.
    extended = kill_ruleset.with_rule(
        'killed(a,b) <= nsubjpass(c,a) & prep_for(c,d) & prep_of(d,b)')
    inc = incremental_update(extended, sentence_corpus, previous)
    assert inc.recomputed == ["killed"]
    # Touching the leaf predicate recomputes it and everything downstream.
    extended2 = kill_ruleset.with_rule('killNoun("slaying").')
    inc2 = incremental_update(extended2, sentence_corpus, previous)
    assert inc2.recomputed == ["killNoun", "killOfVictim", "killed"]


def test_incremental_random_sequence(sentence_corpus):
    rng = random.Random(5)
    rs = Ruleset.from_text(KILL_RULESET_TEXT, Registry(sentence_corpus))
    result = materialize_ruleset(rs, sentence_corpus)
    extra = [
        'killNoun("slaying").',
        'killNoun("shooting").',
        'killOfVictim(c,b) <= prep_of(c,b) & token(c,"death")',
        'killed(a,b) <= nsubjpass(c,a) & prep_for(c,d) & prep_of(d,b)',
        'witness(a) <= isCapitalized(a) & nsubjpass(c,a)',
    ]
    for step in range(12):
        if rng.random() < 0.6 or len(rs.rules) < 4:
            rs = rs.with_rule(rng.choice(extra))
        else:
            victim = rng.choice(rs.rules)
            rs = rs.without_rule(victim.rule_id)
        result = incremental_update(rs, sentence_corpus, result)
        full = materialize_ruleset(rs, sentence_corpus)
        assert result.by_pred == full.by_pred, f"step {step}"
        assert result.rule_counts == full.rule_counts, f"step {step}"


def test_safe_rules_are_domain_independent():
    # Extending the string domain with fresh constants never changes a safe
    # rule's result set (range restriction at work).
    rng = random.Random(31)
    corpus = synth.random_corpus(rng, sentences=15, max_tokens=5)
    factory = synth.RandomRuleFactory(corpus, rng)
    reg = Registry(corpus)
    for _ in range(20):
        rule = factory.safe_rule()
        reg.register_derived(rule.head.pred, len(rule.head.args))
        base = oracle.eval_rule(rule, reg, corpus, {})
        widened_domains = oracle.active_domains(
            corpus, extra_strings=["fresh-one", "fresh-two"])
        widened = oracle.eval_rule(rule, reg, corpus, {},
                                   domains=widened_domains)
        assert widened == base
