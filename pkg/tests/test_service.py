import pytest
from fastapi.testclient import TestClient

from rexbench.corpus import CorpusBuilder, build_indices
from rexbench.executor import materialize_ruleset
from rexbench.http_api import build_app
from rexbench.rules import Registry, Ruleset
from rexbench.session import (Session, rule_comment, sample_extractions,
                              sentence_view)
from tests.conftest import (KILL_RULESET_TEXT, SENTENCE_DEPS, SENTENCE_TOKENS)


def _workbench_corpus():
    """Fixture sentence plus a few extra clauses for search/bootstrap."""
    builder = CorpusBuilder()
    builder.start_document("d1")
    builder.add_sentence(SENTENCE_TOKENS, SENTENCE_DEPS,
                         [("person", 2, 2), ("person", 9, 9)])
    for i, (subj, verb, obj) in enumerate([
            ("Booth", "killed", "Lincoln"), ("Oswald", "killed", "Kennedy"),
            ("Ray", "murdered", "King"), ("Booth", "murdered", "Lincoln"),
            ("Czolgosz", "killed", "McKinley"),
            ("Oswald", "murdered", "Kennedy")]):
        builder.add_sentence(
            [(subj, subj.lower(), "NNP"), (verb, verb, "VBD"),
             (obj, obj.lower(), "NNP"), (".", ".", ".")],
            [("nsubj", 2, 1), ("dobj", 2, 3)],
            [("person", 1, 1), ("person", 3, 3)])
    builder.add_sentence(
        [("The", "the", "DT"), ("trial", "trial", "NN"),
         ("ended", "end", "VBD"), (".", ".", ".")],
        [("det", 2, 1), ("nsubj", 3, 2)])
    return build_indices(builder.finish())


@pytest.fixture
def session():
    return Session(_workbench_corpus(), wordsim_min_count=1)


@pytest.fixture
def client(session):
    return TestClient(build_app(session))


# -- comments -----------------------------------------------------------------------


def test_rule_comment_single_lexical(session):
    info = session.add_rule(
        "default",
        'killed(a,b) <= nsubj(c,a) & dobj(c,b) & token(c,"killed")')
    assert info["comment"] == "… killed …"
    assert info["count"] == 3
    assert info["sample_sentence_id"] == 1


def test_rule_comment_two_constants(sentence_corpus):
    # Position-sort oracle on the fixture sentence: placeholders at 2 and 9,
    # lexical anchors at 4 and 7.
    rs = Ruleset.from_text(
        'pair(a,b) <= nsubjpass(c,a) & token(c,"sentenced") & prep_for(c,d) '
        '& token(d,"murder") & prep_of(d,b).',
        Registry(sentence_corpus))
    result = materialize_ruleset(rs, sentence_corpus)
    comment = rule_comment(rs.rules[0], result, sentence_corpus, rs.registry)
    assert comment.text == "… sentenced murder …"
    assert comment.sample_sentence_id == 0


def test_rule_comment_composition_marker(sentence_corpus):
    rs = Ruleset.from_text(KILL_RULESET_TEXT, Registry(sentence_corpus))
    result = materialize_ruleset(rs, sentence_corpus)
    killed_rule = rs.rules_for("killed")[0]
    comment = rule_comment(killed_rule, result, sentence_corpus, rs.registry)
    assert comment.text == "… sentenced [killOfVictim] …"


def test_rule_comment_string_through_derived(sentence_corpus):
    # token(c, d) with d constrained by a string-valued derived predicate is
    # a lexical anchor one level deep; head arguments stay placeholders even
    # when lexically constrained.
    text = KILL_RULESET_TEXT + \
        "\nvictimOf(b) <= prep_of(c,b) & token(c,d) & killNoun(d).\n"
    rs = Ruleset.from_text(text, Registry(sentence_corpus))
    result = materialize_ruleset(rs, sentence_corpus)
    comment = rule_comment(rs.rules_for("victimOf")[0], result,
                           sentence_corpus, rs.registry)
    assert comment.text == "murder …"
    kov = rule_comment(rs.rules_for("killOfVictim")[0], result,
                       sentence_corpus, rs.registry)
    assert kov.text == "… …"


def test_rule_comment_no_matches(session):
    info = session.add_rule(
        "default", 'ghost(a,b) <= nsubj(c,a) & dobj(c,b) & token(c,"zzz")')
    assert info["comment"] == "(no matches)"


def test_rule_comment_no_lexical_atoms(session):
    info = session.add_rule("default", "pairs(a,b) <= nsubj(c,a) & dobj(c,b)")
    assert info["comment"] == "… …"


# -- sampling -----------------------------------------------------------------------


def test_sample_deterministic():
    rows = list(range(500))
    s1, t1 = sample_extractions(rows, 100, seed=42)
    s2, t2 = sample_extractions(rows, 100, seed=42)
    assert s1 == s2
    assert len(s1) == 100 and len(set(s1)) == 100
    assert not t1
    s3, _ = sample_extractions(rows, 100, seed=43)
    assert s1 != s3


def test_sample_overflow_and_zero():
    rows = list(range(5))
    all_rows, truncated = sample_extractions(rows, 10, seed=1)
    assert all_rows == rows and truncated
    empty, truncated = sample_extractions(rows, 0, seed=1)
    assert empty == [] and not truncated


# -- the HTTP surface ------------------------------------------------------------------


def test_search_endpoint(client):
    body = client.get("/v1/search", params={"q": "killed"}).json()
    assert [h["sentence_id"] for h in body["hits"]] == [1, 2, 5]
    words = [s["word"] for s in body["similar"]]
    assert "murdered" in words
    for s in body["similar"]:
        assert s["occurrences"] >= 1
    assert client.get("/v1/search", params={"q": "  "}).status_code == 400


def test_search_limit_and_oov(client):
    body = client.get("/v1/search", params={"q": "killed", "limit": 2}).json()
    assert len(body["hits"]) == 2
    body = client.get("/v1/search", params={"q": "zebra"}).json()
    assert body["hits"] == [] and body["similar"] == []


def test_rule_crud_and_versions(client, session):
    r = client.post("/v1/rulesets/default/rules", json={
        "text": 'killed(a,b) <= nsubj(c,a) & dobj(c,b) & token(c,"killed")'})
    assert r.status_code == 200
    info = r.json()
    assert info["count"] == 3
    v1 = session.ruleset("default").version_id()

    bad = client.post("/v1/rulesets/default/rules",
                      json={"text": "p(a) <= !person(a)"})
    assert bad.status_code == 400
    assert "a" in bad.json()["detail"]
    assert session.ruleset("default").version_id() == v1  # unchanged

    listed = client.get("/v1/rulesets/default/rules").json()
    assert len(listed["rules"]) == 1

    deleted = client.delete(
        f"/v1/rulesets/default/rules/{info['rule_id']}")
    assert deleted.status_code == 200
    assert client.get("/v1/rulesets/default/rules").json()["rules"] == []


def test_syntax_error_payload(client):
    r = client.post("/v1/rulesets/default/rules", json={"text": "p(a) <= q(a,"})
    assert r.status_code == 400
    assert "column" in r.json()["detail"]


def test_matches_endpoint(client):
    info = client.post("/v1/rulesets/default/rules", json={
        "text": 'killed(a,b) <= nsubj(c,a) & dobj(c,b) & token(c,"murdered")'
    }).json()
    body = client.get("/v1/rulesets/default/matches",
                      params={"rule": info["rule_id"]}).json()
    assert body["count"] == 3
    missing = client.get("/v1/rulesets/default/matches",
                         params={"rule": "nope"})
    assert missing.status_code == 404


def test_generalize_endpoint(client):
    info = client.post("/v1/rulesets/default/rules", json={
        "text": 'killed(a,b) <= nsubj(c,a) & dobj(c,b) & token(c,"murdered")'
    }).json()
    preview = client.post(
        f"/v1/rulesets/default/rules/{info['rule_id']}/generalize",
        json={"accept": False}).json()
    assert "actInd" in preview["generalized"]
    assert len(client.get("/v1/rulesets/default/rules").json()["rules"]) == 1
    accepted = client.post(
        f"/v1/rulesets/default/rules/{info['rule_id']}/generalize",
        json={"accept": True}).json()
    assert accepted["accepted"]
    rules = client.get("/v1/rulesets/default/rules").json()["rules"]
    assert len(rules) == 1
    assert "actInd" in rules[0]["text"]


def test_bootstrap_flow(client):
    client.post("/v1/rulesets/default/rules", json={
        "text": 'killed(a,b) <= nsubj(c,a) & dobj(c,b) & token(c,"killed")'})
    job = client.post("/v1/bootstrap/killed/iterate",
                      json={"use_coref": False}).json()
    body = client.get(f"/v1/bootstrap/jobs/{job['job_id']}").json()
    assert body["status"] == "done"
    candidates = body["candidates"]
    assert candidates, "no candidates suggested"
    assert any("murdered" in c["rule_text"] for c in candidates)

    top = candidates[0]
    before = client.get("/v1/rulesets/default/rules").json()["rules"]
    total_before = sum(r["count"] for r in before)
    accepted = client.post("/v1/bootstrap/killed/accept",
                           json={"rule_id": top["rule_id"]}).json()
    assert accepted["count"] > 0
    after = client.get("/v1/rulesets/default/rules").json()["rules"]
    assert len(after) == 2
    assert sum(r["count"] for r in after) > total_before


def test_bootstrap_unknown_relation(client):
    r = client.post("/v1/bootstrap/nothing/iterate", json={})
    assert r.status_code == 400


def test_induce_from_click(client):
    body = client.post("/v1/induce/from-click", json={
        "sentence_id": 1, "arg1_offset": 1, "arg2_offset": 3}).json()
    assert body["candidates"]
    assert 'token(c, "killed")' in body["candidates"][0]["rule_text"]


def test_extraction_sampling_endpoint(client):
    client.post("/v1/rulesets/default/rules", json={
        "text": 'killed(a,b) <= nsubj(c,a) & dobj(c,b) & token(c,"killed")'})
    body = client.get("/v1/relations/killed/extractions",
                      params={"sample": 2, "seed": 7}).json()
    again = client.get("/v1/relations/killed/extractions",
                       params={"sample": 2, "seed": 7}).json()
    assert body == again
    assert len(body["extractions"]) == 2
    assert body["total"] == 3


def test_sentence_view_endpoint(client):
    view = client.get("/v1/sentences/0/view").json()
    assert len(view["tokens"]) == 10
    labels = {d["label"] for d in view["deps"]}
    assert {"nn", "nsubjpass", "auxpass", "prep_for", "det",
            "prep_of"} <= labels
    assert view["entities"][0]["etype"] == "person"
    assert client.get("/v1/sentences/999/view").status_code == 404


def test_precision_pipeline(client):
    client.post("/v1/rulesets/default/rules", json={
        "text": 'killed(a,b) <= nsubj(c,a) & dobj(c,b) & token(c,"killed")'})
    rows = client.get("/v1/relations/killed/extractions").json()["extractions"]
    lines = []
    for i, row in enumerate(rows):
        label = "1" if i < 2 else "0"
        lines.append("\t".join(row + [label]))
    imported = client.post("/v1/labels/import",
                           json={"tsv": "\n".join(lines)}).json()
    assert imported["imported"] == 3
    precision = client.get("/v1/relations/killed/precision").json()
    assert precision["labeled"] == 3
    assert precision["precision"] == pytest.approx(2 / 3)


def test_save_load_roundtrip(session, tmp_path):
    session.add_rule(
        "default",
        'killed(a,b) <= nsubj(c,a) & dobj(c,b) & token(c,"killed")',
        comment="simple active clause")
    session.save_ruleset("default", tmp_path / "rules.rex")
    loaded = session.load_ruleset("other", tmp_path / "rules.rex")
    assert loaded["rules"] == 1
    a = session.ruleset("default").rules
    b = session.ruleset("other").rules
    assert [r.head for r in a] == [r.head for r in b]
    assert [r.body for r in a] == [r.body for r in b]
    assert [r.comment for r in a] == [r.comment for r in b]


def test_load_bad_file_is_atomic(session, tmp_path):
    session.add_rule("default",
                     'killed(a,b) <= nsubj(c,a) & dobj(c,b) & token(c,"killed")')
    before = session.ruleset("default").version_id()
    bad = tmp_path / "bad.rex"
    bad.write_text('ok(a,b) <= nsubj(b,a).\nbroken(a <= nn(a,b).\n')
    with pytest.raises(Exception):
        session.load_ruleset("default", bad)
    assert session.ruleset("default").version_id() == before
    assert len(session.ruleset("default").rules) == 1


def test_event_log_written(tmp_path):
    session = Session(_workbench_corpus(), state_dir=tmp_path,
                      wordsim_min_count=1)
    session.add_rule("default",
                     'killed(a,b) <= nsubj(c,a) & dobj(c,b) & token(c,"killed")')
    log = (tmp_path / "events.jsonl").read_text().strip().splitlines()
    assert len(log) == 1
    import json
    entry = json.loads(log[0])
    assert entry["event"] == "add_rule"
