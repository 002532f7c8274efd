"""Workbench sessions: ruleset versions, search, comments, sampling,
persistence and the precision pipeline.

A session owns one corpus plus named rulesets.  Every mutation parses and
validates first, then atomically swaps in a new immutable ruleset version and
refreshes match counts through an incremental update; a failed request leaves
the previous version active.
"""

from __future__ import annotations

import json
import random
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import bootstrap, wordsim
from .corpus import Corpus
from .executor import (MaterializationResult, extractions,
                       incremental_update, materialize_ruleset)
from .inflect import generalize_rule
from .rules import (And, Atom, Compare, Exists, Not, Or, Registry, Rule,
                    Ruleset, RuleError, Var, VarType, free_vars, infer_types)

PLACEHOLDER = "…"  # the ellipsis shown for head arguments


@dataclass
class RuleComment:
    rule_id: str
    text: str
    sample_sentence_id: Optional[int]


@dataclass
class SentenceView:
    sentence_id: int
    doc_id: str
    tokens: list
    deps: list
    entities: list
    corefs: list

    def to_dict(self) -> dict:
        return {
            "sentence_id": self.sentence_id,
            "doc_id": self.doc_id,
            "tokens": self.tokens,
            "deps": self.deps,
            "entities": self.entities,
            "corefs": self.corefs,
        }


def sentence_view(corpus: Corpus, sentence_id: int) -> SentenceView:
    sent = corpus.sentence(sentence_id)
    tokens = [{"offset": t.pos[1], "surface": t.surface, "lemma": t.lemma,
               "tag": t.tag} for t in sent.tokens]
    deps = [{"label": e.label, "head": e.head[1], "dependent": e.dependent[1]}
            for e in corpus.edges_of_sentence(sentence_id)]
    deps.sort(key=lambda d: (d["head"], d["dependent"], d["label"]))
    entities = [{"etype": m.etype, "start": m.span[1], "end": m.span[2],
                 "source": m.source}
                for m in corpus.entity_mentions if m.span[0] == sentence_id]
    entities.sort(key=lambda m: (m["start"], m["end"], m["etype"]))
    corefs = []
    for cluster in corpus.coref_clusters:
        spans = sorted(m for m in cluster.mentions if m[0] == sentence_id)
        if spans:
            corefs.append({"cluster_id": cluster.cluster_id,
                           "spans": [[s[1], s[2]] for s in spans]})
    return SentenceView(sentence_id, sent.doc_id, tokens, deps, entities,
                        corefs)


# -- rule comments -----------------------------------------------------------------


def _conjunctive_atoms(formula):
    """Atoms on the positive conjunctive spine of a normalized body."""
    if isinstance(formula, Atom):
        return [formula]
    if isinstance(formula, And):
        out = []
        for p in formula.parts:
            out.extend(_conjunctive_atoms(p))
        return out
    return []


def rule_comment(rule: Rule, result: MaterializationResult,
                 corpus: Corpus, registry: Registry) -> RuleComment:
    """Surface-token summary of what a rule matches.

    From the lowest-id matched sentence: tokens referenced by lexical
    ``token`` constraints (directly constant, or constant one level deep
    through a string-valued derived predicate), markers for deeper derived
    predicates, and placeholders for the head arguments, in sentence order.
    """
    rows = result.rule_rows.get(rule.rule_id, set())
    if not rows:
        return RuleComment(rule.rule_id, "(no matches)", None)

    from .executor import evaluate_rule
    typed = infer_types(rule, registry)
    assignments = evaluate_rule(rule, registry, corpus, result.by_pred,
                                stats=corpus.stats(), project="all")
    if not assignments:
        return RuleComment(rule.rule_id, "(no matches)", None)
    schema = tuple(sorted(free_vars(rule.body)))

    def row_sentence(row):
        sids = [v[0] for v in row if isinstance(v, tuple)]
        return min(sids) if sids else 0

    chosen = min(assignments, key=lambda row: (row_sentence(row), row))
    sid = row_sentence(chosen)
    env = dict(zip(schema, chosen))

    atoms = _conjunctive_atoms(rule.body)
    str_derived_vars = set()
    for a in atoms:
        sig = registry.resolve(a.pred)
        if sig is not None and sig.kind == "derived":
            for arg, at in zip(a.args, sig.arg_types):
                if isinstance(arg, Var) and at == VarType.STR:
                    str_derived_vars.add(arg.name)

    items = []
    for a in atoms:
        if a.pred == "token" and isinstance(a.args[0], Var):
            pos_val = env.get(a.args[0].name)
            if not isinstance(pos_val, tuple) or pos_val[0] != sid:
                continue
            second = a.args[1]
            lexical = not isinstance(second, Var) or second.name in str_derived_vars
            if lexical:
                tok = corpus.token_at(pos_val)
                if tok is not None:
                    items.append((pos_val, tok.surface))
    for a in atoms:
        sig = registry.resolve(a.pred)
        if sig is None or sig.kind != "derived":
            continue
        pos_args = [arg for arg, at in zip(a.args, sig.arg_types)
                    if isinstance(arg, Var) and at in (VarType.POS,
                                                       VarType.SPAN)]
        if not pos_args:
            continue
        val = env.get(pos_args[0].name)
        if isinstance(val, tuple) and val[0] == sid:
            anchor = val if len(val) == 2 else (val[0], val[1])
            items.append((anchor, f"[{a.pred}]"))

    head_positions = set()
    for arg in rule.head.args:
        if isinstance(arg, Var):
            val = env.get(arg.name)
            if isinstance(val, tuple) and val[0] == sid:
                anchor = val if len(val) == 2 else (val[0], val[1])
                head_positions.add(anchor)
    for pos in head_positions:
        items.append((pos, PLACEHOLDER))

    by_pos = {}
    for pos, text in items:  # later entries win, so placeholders override
        by_pos[pos] = text
    words = [by_pos[pos] for pos in sorted(by_pos)]
    text = " ".join(words) if words else PLACEHOLDER
    return RuleComment(rule.rule_id, text, sid)


# -- sampling and precision -----------------------------------------------------------


def sample_extractions(extraction_list, n: int, seed: int):
    """Reproducible sample without replacement; returns (rows, truncated)
    where truncated flags n exceeding the population."""
    population = list(extraction_list)
    if n >= len(population):
        return population, n > len(population)
    rng = random.Random(seed)
    return rng.sample(population, n), False


@dataclass
class LabelStore:
    labels: dict = field(default_factory=dict)  # extraction key -> bool

    @staticmethod
    def key(relation, arg1, arg2, doc_id, sentence_id):
        return (relation, arg1, arg2, doc_id, int(sentence_id))

    def import_tsv(self, text: str) -> int:
        added = 0
        for line_no, line in enumerate(text.splitlines(), start=1):
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) < 9:
                raise ValueError(
                    f"line {line_no}: label rows need 9 tab-separated fields "
                    "(extraction export + 0/1 label)")
            if cols[8] not in ("0", "1"):
                raise ValueError(f"line {line_no}: label must be 0 or 1")
            self.labels[self.key(cols[0], cols[1], cols[2], cols[3],
                                 cols[4])] = cols[8] == "1"
            added += 1
        return added

    def precision(self, relation: str, extraction_list) -> dict:
        labeled = 0
        correct = 0
        for e in extraction_list:
            k = self.key(e.relation, e.arg1, e.arg2, e.doc_id, e.sentence_id)
            if k in self.labels:
                labeled += 1
                if self.labels[k]:
                    correct += 1
        return {
            "relation": relation,
            "labeled": labeled,
            "correct": correct,
            "precision": (correct / labeled) if labeled else None,
        }


# -- the session -------------------------------------------------------------------------


class WorkbenchError(RuleError):
    pass


class Session:
    """Single-corpus workbench state; mutations serialize on a lock and every
    accepted mutation produces a new ruleset version."""

    def __init__(self, corpus: Corpus, state_dir: Optional[Path] = None,
                 wordsim_min_count: int = 1, session_id: str = "default",
                 vectors: Optional[wordsim.VectorTable] = None):
        self.session_id = session_id
        self.corpus = corpus
        self.base_registry = Registry(corpus)
        self.vectors = vectors if vectors is not None else \
            wordsim.build_vectors(corpus, min_count=wordsim_min_count)
        self.rulesets: dict = {}
        self.results: dict = {}
        self.versions: dict = {}
        self.labels = LabelStore()
        self.pending_candidates: dict = {}
        self.jobs: dict = {}
        self._job_counter = 0
        self.state_dir = Path(state_dir) if state_dir else None
        self._lock = threading.Lock()
        if self.state_dir:
            self.state_dir.mkdir(parents=True, exist_ok=True)

    # -- events ------------------------------------------------------------------

    def _log_event(self, kind: str, **payload):
        if not self.state_dir:
            return
        entry = {"ts": time.time(), "session": self.session_id,
                 "event": kind, **payload}
        with open(self.state_dir / "events.jsonl", "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")

    # -- rulesets ----------------------------------------------------------------

    def ruleset(self, ruleset_id: str) -> Ruleset:
        if ruleset_id not in self.rulesets:
            self.rulesets[ruleset_id] = Ruleset.empty(self.base_registry)
            self.results[ruleset_id] = materialize_ruleset(
                self.rulesets[ruleset_id], self.corpus)
            self.versions[ruleset_id] = [self.rulesets[ruleset_id].version_id()]
        return self.rulesets[ruleset_id]

    def result(self, ruleset_id: str) -> MaterializationResult:
        self.ruleset(ruleset_id)
        return self.results[ruleset_id]

    def _swap(self, ruleset_id: str, new_ruleset: Ruleset, event: str,
              **payload):
        previous = self.results[ruleset_id]
        result = incremental_update(new_ruleset, self.corpus, previous)
        self.rulesets[ruleset_id] = new_ruleset
        self.results[ruleset_id] = result
        self.versions[ruleset_id].append(new_ruleset.version_id())
        self._log_event(event, ruleset=ruleset_id,
                        version=new_ruleset.version_id(), **payload)
        return result

    def add_rule(self, ruleset_id: str, text: str,
                 comment: Optional[str] = None) -> dict:
        with self._lock:
            current = self.ruleset(ruleset_id)
            new_ruleset = current.with_rule(text, comment=comment)
            result = self._swap(ruleset_id, new_ruleset, "add_rule", rule=text)
            rule = new_ruleset.rules[-1]
            return self.rule_info(ruleset_id, rule.rule_id)

    def remove_rule(self, ruleset_id: str, rule_id: str) -> None:
        with self._lock:
            current = self.ruleset(ruleset_id)
            new_ruleset = current.without_rule(rule_id)
            self._swap(ruleset_id, new_ruleset, "remove_rule", rule_id=rule_id)

    def generalize(self, ruleset_id: str, rule_id: str,
                   accept: bool = False) -> dict:
        with self._lock:
            current = self.ruleset(ruleset_id)
            rule = current.rule_by_id(rule_id)
            generalized = generalize_rule(rule)
            preview = {"rule_id": rule_id,
                       "generalized": _rule_text(generalized)}
            if accept:
                new_ruleset = current.without_rule(rule_id).with_rule(generalized)
                self._swap(ruleset_id, new_ruleset, "generalize",
                           rule_id=rule_id)
                preview["accepted"] = True
                preview["new_rule_id"] = generalized.rule_id
            return preview

    def rule_info(self, ruleset_id: str, rule_id: str) -> dict:
        ruleset = self.ruleset(ruleset_id)
        result = self.results[ruleset_id]
        rule = ruleset.rule_by_id(rule_id)
        comment = rule_comment(rule, result, self.corpus, ruleset.registry)
        return {
            "rule_id": rule_id,
            "text": _rule_text(rule),
            "comment": comment.text,
            "sample_sentence_id": comment.sample_sentence_id,
            "count": result.count(rule_id),
            "seconds": result.rule_seconds.get(rule_id),
        }

    def list_rules(self, ruleset_id: str) -> list:
        ruleset = self.ruleset(ruleset_id)
        return [self.rule_info(ruleset_id, r.rule_id) for r in ruleset.rules]

    # -- search and suggestions ------------------------------------------------------

    def search(self, keyword: str, limit: int = 20, k_similar: int = 10) -> dict:
        if not keyword.strip():
            raise WorkbenchError("empty search keyword")
        hit_ids = self.corpus.search_sentences(keyword, limit)
        hits = [{"sentence_id": sid,
                 "doc_id": self.corpus.sentence(sid).doc_id,
                 "text": self.corpus.sentence(sid).text()}
                for sid in hit_ids]
        similar = [
            {"word": s.word, "score": s.score, "occurrences": s.occurrences}
            for s in wordsim.similar_words(keyword, k_similar, self.vectors)]
        prefix = [
            {"word": s.word, "occurrences": s.occurrences}
            for s in wordsim.prefix_words(keyword, self.vectors)[:k_similar]]
        return {"keyword": keyword, "hits": hits, "similar": similar,
                "prefix": prefix}

    # -- bootstrap ----------------------------------------------------------------------

    def start_bootstrap(self, ruleset_id: str, relation: str,
                        config: Optional[bootstrap.BootstrapConfig] = None) -> str:
        ruleset = self.ruleset(ruleset_id)
        if relation not in ruleset.head_predicates():
            raise WorkbenchError(f"relation {relation!r} has no rules")
        self._job_counter += 1
        job_id = f"job{self._job_counter}"
        self.jobs[job_id] = {"status": "running", "relation": relation,
                             "ruleset": ruleset_id}
        config = config or bootstrap.BootstrapConfig()
        result = self.results[ruleset_id]
        ex = extractions(relation, result, self.corpus)
        ranked, diag = bootstrap.iterate(
            relation, ex, self.corpus, ruleset.registry, config,
            exclude_rule_ids=[r.rule_id for r in ruleset.rules])
        key = (ruleset_id, relation)
        self.pending_candidates[key] = ranked
        self.jobs[job_id].update({
            "status": "done",
            "candidates": [self._candidate_info(c) for c in ranked],
            "matches": diag.matches,
            "skipped_no_path": diag.skipped_no_path,
        })
        self._log_event("bootstrap", ruleset=ruleset_id, relation=relation,
                        candidates=len(ranked))
        return job_id

    def _candidate_info(self, cand) -> dict:
        return {
            "rule_id": cand.rule.rule_id,
            "rule_text": cand.rule_text,
            "extraction_count": cand.extraction_count,
            "overlap_count": cand.overlap_count,
            "pmi": cand.pmi,
        }

    def job(self, job_id: str) -> dict:
        if job_id not in self.jobs:
            raise WorkbenchError(f"unknown job {job_id!r}")
        return self.jobs[job_id]

    def candidates(self, ruleset_id: str, relation: str,
                   sort: str = "pmi") -> list:
        ranked = list(self.pending_candidates.get((ruleset_id, relation), ()))
        if sort == "count":
            ranked.sort(key=lambda c: (-c.extraction_count, c.rule_text))
        return [self._candidate_info(c) for c in ranked]

    def accept_candidate(self, ruleset_id: str, relation: str,
                         candidate_rule_id: str) -> dict:
        key = (ruleset_id, relation)
        ranked = self.pending_candidates.get(key, [])
        match = next((c for c in ranked
                      if c.rule.rule_id == candidate_rule_id), None)
        if match is None:
            raise WorkbenchError(f"unknown candidate {candidate_rule_id!r}")
        with self._lock:
            current = self.ruleset(ruleset_id)
            new_ruleset = current.with_rule(match.rule)
            self._swap(ruleset_id, new_ruleset, "accept_candidate",
                       rule_id=candidate_rule_id, relation=relation)
        self.pending_candidates[key] = [c for c in ranked if c is not match]
        return self.rule_info(ruleset_id, match.rule.rule_id)

    def reject_candidate(self, ruleset_id: str, relation: str,
                         candidate_rule_id: str) -> None:
        key = (ruleset_id, relation)
        ranked = self.pending_candidates.get(key, [])
        self.pending_candidates[key] = [
            c for c in ranked if c.rule.rule_id != candidate_rule_id]

    def induce_from_click(self, sentence_id: int, arg1_offset: int,
                          arg2_offset: int) -> list:
        cands = bootstrap.induce_from_click(
            self.corpus, self.base_registry, sentence_id, arg1_offset,
            arg2_offset)
        return [self._candidate_info(c) for c in cands]

    # -- extractions, sampling, precision ----------------------------------------------

    def relation_extractions(self, ruleset_id: str, relation: str,
                             sample: Optional[int] = None,
                             seed: int = 0) -> dict:
        result = self.result(ruleset_id)
        if relation not in result.by_pred:
            raise WorkbenchError(f"relation {relation!r} is not materialized")
        rows = extractions(relation, result, self.corpus)
        truncated = False
        if sample is not None:
            rows, truncated = sample_extractions(rows, sample, seed)
        return {
            "relation": relation,
            "total": len(result.by_pred[relation]),
            "truncated": truncated,
            "extractions": [e.tsv_row().split("\t") for e in rows],
        }

    def import_labels(self, text: str) -> int:
        return self.labels.import_tsv(text)

    def precision(self, ruleset_id: str, relation: str) -> dict:
        result = self.result(ruleset_id)
        if relation not in result.by_pred:
            raise WorkbenchError(f"relation {relation!r} is not materialized")
        rows = extractions(relation, result, self.corpus)
        return self.labels.precision(relation, rows)

    # -- persistence ----------------------------------------------------------------------

    def save_ruleset(self, ruleset_id: str, path) -> str:
        ruleset = self.ruleset(ruleset_id)
        Path(path).write_text(ruleset.to_text(), encoding="utf-8")
        self._log_event("save_ruleset", ruleset=ruleset_id, path=str(path))
        return ruleset.version_id()

    def load_ruleset(self, ruleset_id: str, path) -> dict:
        text = Path(path).read_text(encoding="utf-8")
        new_ruleset = Ruleset.from_text(text, self.base_registry)
        with self._lock:
            self.ruleset(ruleset_id)
            result = self._swap(ruleset_id, new_ruleset, "load_ruleset",
                                path=str(path))
        return {"ruleset": ruleset_id, "rules": len(new_ruleset.rules),
                "version": new_ruleset.version_id()}


def _rule_text(rule: Rule) -> str:
    from .rules import print_rule
    return print_rule(rule, with_comment=False)
