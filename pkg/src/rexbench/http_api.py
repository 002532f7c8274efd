"""HTTP face of the workbench, one JSON resource per session operation.

All routes live under ``/v1``.  Mutations return the refreshed rule info so
clients can render counts without a second request; rule errors map to 400,
missing resources to 404.
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .bootstrap import BootstrapConfig
from .rules import RuleError
from .session import Session, WorkbenchError, sentence_view


class RuleSubmission(BaseModel):
    text: str
    comment: Optional[str] = None


class GeneralizeRequest(BaseModel):
    accept: bool = False


class BootstrapRequest(BaseModel):
    ruleset: str = "default"
    use_coref: bool = True
    use_entity_types: bool = False
    max_path_len: int = 4
    min_overlap: int = 1
    sort: str = "pmi"


class ClickRequest(BaseModel):
    sentence_id: int
    arg1_offset: int
    arg2_offset: int


class CandidateDecision(BaseModel):
    ruleset: str = "default"
    rule_id: str


class LabelImport(BaseModel):
    tsv: str


def build_app(session: Session) -> FastAPI:
    app = FastAPI(title="rexbench", version="1.0")

    def guard(fn, *args, not_found=False, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (WorkbenchError, RuleError, ValueError) as err:
            raise HTTPException(status_code=404 if not_found else 400,
                                detail=str(err)) from err

    @app.get("/v1/status")
    def status():
        return {
            "session": session.session_id,
            "sentences": session.corpus.sentence_count,
            "tokens": session.corpus.token_count,
            "rulesets": {rid: rs.version_id()
                         for rid, rs in session.rulesets.items()},
        }

    @app.get("/v1/search")
    def search(q: str, limit: int = 20, k: int = 10):
        return guard(session.search, q, limit, k)

    @app.get("/v1/suggest/similar")
    def suggest_similar(w: str, k: int = 10):
        from . import wordsim
        return {"seed": w, "suggestions": [
            {"word": s.word, "score": s.score, "occurrences": s.occurrences}
            for s in wordsim.similar_words(w, k, session.vectors)]}

    @app.get("/v1/suggest/prefix")
    def suggest_prefix(w: str, k: int = 20):
        from . import wordsim
        return {"seed": w, "suggestions": [
            {"word": s.word, "occurrences": s.occurrences}
            for s in wordsim.prefix_words(w, session.vectors)[:k]]}

    @app.get("/v1/rulesets/{ruleset_id}/rules")
    def list_rules(ruleset_id: str):
        return {"ruleset": ruleset_id,
                "version": session.ruleset(ruleset_id).version_id(),
                "rules": session.list_rules(ruleset_id)}

    @app.post("/v1/rulesets/{ruleset_id}/rules")
    def add_rule(ruleset_id: str, submission: RuleSubmission):
        return guard(session.add_rule, ruleset_id, submission.text,
                     submission.comment)

    @app.delete("/v1/rulesets/{ruleset_id}/rules/{rule_id}")
    def delete_rule(ruleset_id: str, rule_id: str):
        guard(session.remove_rule, ruleset_id, rule_id, not_found=True)
        return {"deleted": rule_id,
                "version": session.ruleset(ruleset_id).version_id()}

    @app.post("/v1/rulesets/{ruleset_id}/rules/{rule_id}/generalize")
    def generalize(ruleset_id: str, rule_id: str, req: GeneralizeRequest):
        return guard(session.generalize, ruleset_id, rule_id, req.accept)

    @app.get("/v1/rulesets/{ruleset_id}/matches")
    def matches(ruleset_id: str, rule: str):
        return guard(session.rule_info, ruleset_id, rule, not_found=True)

    @app.post("/v1/bootstrap/{relation}/iterate")
    def bootstrap_iterate(relation: str, req: BootstrapRequest):
        config = BootstrapConfig(
            use_coref=req.use_coref, use_entity_types=req.use_entity_types,
            max_path_len=req.max_path_len, min_overlap=req.min_overlap,
            sort=req.sort)
        job_id = guard(session.start_bootstrap, req.ruleset, relation, config)
        return {"job_id": job_id}

    @app.get("/v1/bootstrap/jobs/{job_id}")
    def bootstrap_job(job_id: str):
        return guard(session.job, job_id, not_found=True)

    @app.get("/v1/bootstrap/{relation}/candidates")
    def bootstrap_candidates(relation: str, ruleset: str = "default",
                             sort: str = "pmi"):
        return {"relation": relation,
                "candidates": session.candidates(ruleset, relation, sort)}

    @app.post("/v1/bootstrap/{relation}/accept")
    def accept_candidate(relation: str, decision: CandidateDecision):
        return guard(session.accept_candidate, decision.ruleset, relation,
                     decision.rule_id)

    @app.post("/v1/bootstrap/{relation}/reject")
    def reject_candidate(relation: str, decision: CandidateDecision):
        session.reject_candidate(decision.ruleset, relation, decision.rule_id)
        return {"rejected": decision.rule_id}

    @app.post("/v1/induce/from-click")
    def induce_from_click(req: ClickRequest):
        return {"candidates": guard(
            session.induce_from_click, req.sentence_id, req.arg1_offset,
            req.arg2_offset)}

    @app.get("/v1/relations/{relation}/extractions")
    def relation_extractions(relation: str, ruleset: str = "default",
                             sample: Optional[int] = None, seed: int = 0):
        return guard(session.relation_extractions, ruleset, relation, sample,
                     seed, not_found=True)

    @app.get("/v1/sentences/{sentence_id}/view")
    def get_sentence_view(sentence_id: int):
        if not (0 <= sentence_id < session.corpus.sentence_count):
            raise HTTPException(status_code=404,
                                detail=f"no sentence {sentence_id}")
        return sentence_view(session.corpus, sentence_id).to_dict()

    @app.post("/v1/labels/import")
    def import_labels(payload: LabelImport):
        return {"imported": guard(session.import_labels, payload.tsv)}

    @app.get("/v1/relations/{relation}/precision")
    def relation_precision(relation: str, ruleset: str = "default"):
        return guard(session.precision, ruleset, relation, not_found=True)

    return app
