"""HTTP API contract and CLI behavior."""

import json
import threading
import time

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from abceval.campaign import Campaign, CampaignConfig
from abceval.corpus import export_corpus
from abceval.service import create_app
from abceval.service.cli import main as cli_main
from helpers import clean_answer, gold_bundle, make_corpus


@pytest.fixture
def campaign(tmp_path):
    corpus = make_corpus(dialogues_per_bot=4)
    config = CampaignConfig(seed=5, double_conversations=sorted(corpus.conversations),
                            double_pairs=sorted(corpus.pairs()))
    camp = Campaign.create(tmp_path / "store", corpus, config)
    for key, task in camp.schema.tasks.items():
        if task.method == "abc_eval":
            camp.load_gold_bundle(gold_bundle(key))
    return camp


@pytest.fixture
def client(campaign):
    return TestClient(create_app(campaign))


def register(client, name="worker"):
    response = client.post("/v1/annotators", json={"display_name": name})
    assert response.status_code == 201
    token = response.json()["token"]
    return {"Authorization": f"Bearer {token}"}


def train(client, headers, task_key, campaign):
    task = campaign.schema.tasks[task_key]
    for round_number in (1, 2, 3):
        gold = client.get(f"/v1/training/{task_key}/next", headers=headers).json()
        turns = {str(t["index"]): clean_answer(task)
                 for t in gold["conversation"]["turns"] if t["speaker"] == "bot"}
        response = client.post(f"/v1/training/{task_key}/submit", headers=headers,
                               json={"round": round_number, "payload": {"turns": turns}})
        assert response.status_code == 200
    return response.json()


# -- auth -------------------------------------------------------------------

def test_health_is_open(client):
    body = client.get("/health").json()
    assert body["status"] == "ok"
    assert "campaign" in body and "build" in body


def test_missing_token_is_401(client):
    assert client.get("/v1/export").status_code == 401


def test_unknown_token_is_401(client):
    headers = {"Authorization": "Bearer not-a-token"}
    assert client.get("/v1/export", headers=headers).status_code == 401


def test_expired_token_is_401(campaign):
    app = create_app(campaign, session_ttl_seconds=-1)
    client = TestClient(app)
    headers = register(client)
    response = client.post("/v1/annotations", headers=headers,
                           json={"assignment_id": "x", "payload": {}})
    assert response.status_code == 401
    assert "expired" in response.json()["detail"]


def test_registration_returns_rfc3339_timestamps(client):
    body = client.post("/v1/annotators", json={"display_name": "w"}).json()
    assert body["issued_at"].endswith("Z")
    assert body["expires_at"] > body["issued_at"]


# -- tasks & training -------------------------------------------------------

def test_task_listing_contract(client):
    tasks = client.get("/v1/tasks").json()["tasks"]
    assert len(tasks) == 18
    for task in tasks:
        assert set(task) == {"key", "method", "labels", "widget", "unit",
                             "payment_usd", "requires_training"}
    behavior = [t for t in tasks if t["method"] == "abc_eval"]
    assert all(t["requires_training"] for t in behavior)
    likert = next(t for t in tasks if t["key"] == "dialogue_likert")
    assert not likert["requires_training"]


def test_training_round_does_not_leak_gold(client):
    headers = register(client)
    gold = client.get("/v1/training/empathy/next", headers=headers).json()
    doc = json.dumps(gold)
    assert "gold_labels" not in doc and "explanation" not in doc
    assert gold["round"] == 1
    assert gold["conversation"]["turns"]


def test_training_flow_and_work_gate(client, campaign):
    headers = register(client)
    assert client.get("/v1/assignments/next", params={"task": "empathy"},
                      headers=headers).status_code == 403
    feedback = train(client, headers, "empathy", campaign)
    assert feedback["verdict"] == "passed"
    assert client.get("/v1/assignments/next", params={"task": "empathy"},
                      headers=headers).status_code == 200


def test_training_feedback_reports_disagreements(client, campaign):
    headers = register(client)
    gold = client.get("/v1/training/commonsense/next", headers=headers).json()
    turns = {str(t["index"]): {"checked": True}
             for t in gold["conversation"]["turns"] if t["speaker"] == "bot"}
    body = client.post("/v1/training/commonsense/submit", headers=headers,
                       json={"round": 1, "payload": {"turns": turns}}).json()
    assert body["mistake_count"] == len(turns)
    assert len(body["disagreements"]) == len(turns)
    for d in body["disagreements"]:
        assert d["annotator_labels"] == ["!Com_b"]


# -- assignments & annotations ----------------------------------------------

def _submit_likert(client, headers, campaign):
    assignment = client.get("/v1/assignments/next",
                            params={"task": "dialogue_likert"}, headers=headers).json()
    payload = {"ratings": {l: 3 for l in campaign.schema.tasks["dialogue_likert"].labels}}
    return assignment, client.post("/v1/annotations", headers=headers, json={
        "assignment_id": assignment["assignment_id"], "payload": payload})


def test_assignment_contract(client, campaign):
    headers = register(client)
    body = client.get("/v1/assignments/next", params={"task": "dialogue_likert"},
                      headers=headers).json()
    assert set(body) == {"assignment_id", "task", "opened_at", "expires_at", "unit"}
    assert body["unit"]["conversation"]["id"] in campaign.corpus.conversations


def test_comparative_assignment_carries_both_sides(client, campaign):
    headers = register(client)
    body = client.get("/v1/assignments/next", params={"task": "comparative"},
                      headers=headers).json()
    unit = body["unit"]
    assert unit["pair_id"] in campaign.corpus.pairs()
    assert unit["first"]["bot_id"] != unit["second"]["bot_id"]


def test_submit_and_idempotent_replay(client, campaign):
    headers = register(client)
    assignment = client.get("/v1/assignments/next", params={"task": "dialogue_likert"},
                            headers=headers).json()
    payload = {"ratings": {l: 4 for l in campaign.schema.tasks["dialogue_likert"].labels}}
    request = {"assignment_id": assignment["assignment_id"], "payload": payload}
    key_headers = {**headers, "Idempotency-Key": "abc-123"}
    first = client.post("/v1/annotations", headers=key_headers, json=request)
    replay = client.post("/v1/annotations", headers=key_headers, json=request)
    assert first.status_code == 201
    assert replay.status_code == 200
    assert first.json() == replay.json()


def test_resubmission_without_key_is_conflict(client, campaign):
    headers = register(client)
    assignment, first = _submit_likert(client, headers, campaign)
    assert first.status_code == 201
    retry = client.post("/v1/annotations", headers=headers, json={
        "assignment_id": assignment["assignment_id"],
        "payload": {"ratings": {l: 3 for l in campaign.schema.tasks["dialogue_likert"].labels}}})
    assert retry.status_code == 400
    assert "submitted" in retry.json()["detail"]


def test_invalid_payload_is_400_with_location(client, campaign):
    headers = register(client)
    assignment = client.get("/v1/assignments/next", params={"task": "dialogue_likert"},
                            headers=headers).json()
    response = client.post("/v1/annotations", headers=headers, json={
        "assignment_id": assignment["assignment_id"],
        "payload": {"ratings": {"Qua_d": 9}}})
    assert response.status_code == 400
    assert "Qua_d" in response.json()["detail"] or "rating" in response.json()["detail"]


def test_cannot_submit_anothers_assignment(client, campaign):
    h1 = register(client, "one")
    h2 = register(client, "two")
    assignment = client.get("/v1/assignments/next", params={"task": "dialogue_likert"},
                            headers=h1).json()
    response = client.post("/v1/annotations", headers=h2, json={
        "assignment_id": assignment["assignment_id"],
        "payload": {"ratings": {l: 3 for l in campaign.schema.tasks["dialogue_likert"].labels}}})
    assert response.status_code == 403


def test_exhausted_pool_is_404(client, campaign):
    headers = register(client)
    while True:
        response = client.get("/v1/assignments/next", params={"task": "dialogue_likert"},
                              headers=headers)
        if response.status_code != 200:
            break
        assignment = response.json()
        client.post("/v1/annotations", headers=headers, json={
            "assignment_id": assignment["assignment_id"],
            "payload": {"ratings": {l: 3
                                    for l in campaign.schema.tasks["dialogue_likert"].labels}}})
    assert response.status_code == 404


def test_concurrent_submissions_both_land(client, campaign):
    h1 = register(client, "one")
    h2 = register(client, "two")
    a1 = client.get("/v1/assignments/next", params={"task": "dialogue_likert"},
                    headers=h1).json()
    a2 = client.get("/v1/assignments/next", params={"task": "dialogue_likert"},
                    headers=h2).json()
    payload = {"ratings": {l: 2 for l in campaign.schema.tasks["dialogue_likert"].labels}}
    results = {}

    def submit(name, headers, assignment):
        results[name] = client.post("/v1/annotations", headers=headers, json={
            "assignment_id": assignment["assignment_id"], "payload": payload})

    threads = [threading.Thread(target=submit, args=("a", h1, a1)),
               threading.Thread(target=submit, args=("b", h2, a2))]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert results["a"].status_code == 201
    assert results["b"].status_code == 201
    export = client.get("/v1/export", headers=h1)
    assert len(export.text.strip().splitlines()) == 2


# -- export & analyses ------------------------------------------------------

def test_export_is_sorted_ndjson(client, campaign):
    headers = register(client)
    _submit_likert(client, headers, campaign)
    response = client.get("/v1/export", headers=headers)
    assert response.headers["content-type"].startswith("application/x-ndjson")
    rows = [json.loads(line) for line in response.text.strip().splitlines()]
    keys = [(r["task_key"], r["conversation_id"], r["annotator_id"]) for r in rows]
    assert keys == sorted(keys)


def test_export_filters_by_task(client, campaign):
    headers = register(client)
    _submit_likert(client, headers, campaign)
    empty = client.get("/v1/export", params={"task": "empathy"}, headers=headers)
    assert empty.text.strip() == ""


def test_analysis_job_lifecycle(client, campaign):
    headers = register(client)
    start = client.post("/v1/analyses", headers=headers,
                        json={"reports": ["power"], "seed": 1})
    assert start.status_code == 202
    job_id = start.json()["id"]
    for _ in range(100):
        body = client.get(f"/v1/analyses/{job_id}", headers=headers).json()
        if body["status"] != "running":
            break
        time.sleep(0.05)
    assert body["status"] == "done"
    assert "power.csv" in body["manifest"]["outputs"]


def test_unknown_job_is_404(client):
    headers = register(client)
    assert client.get("/v1/analyses/nope", headers=headers).status_code == 404


# -- CLI --------------------------------------------------------------------

@pytest.fixture
def cli_env(tmp_path):
    corpus = make_corpus(dialogues_per_bot=4)
    corpus_path = tmp_path / "corpus.json"
    corpus_path.write_text(json.dumps(export_corpus(corpus)))
    return tmp_path, corpus_path


def test_cli_import_valid(cli_env):
    tmp_path, corpus_path = cli_env
    result = CliRunner().invoke(cli_main, ["import", "--corpus", str(corpus_path)])
    assert result.exit_code == 0
    assert "conversations: 8" in result.output


def test_cli_import_invalid_exits_one(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"conversations": [{"id": "x"}]}')
    result = CliRunner().invoke(cli_main, ["import", "--corpus", str(bad)])
    assert result.exit_code == 1


def test_cli_campaign_create_and_status(cli_env):
    tmp_path, corpus_path = cli_env
    store = tmp_path / "store"
    runner = CliRunner()
    created = runner.invoke(cli_main, [
        "campaign", "create", "--store", str(store), "--corpus", str(corpus_path),
        "--seed", "3", "--double-fraction", "0.5"])
    assert created.exit_code == 0, created.output
    status = runner.invoke(cli_main, ["campaign", "status", "--store", str(store)])
    assert status.exit_code == 0
    assert "annotators: 0" in status.output


def test_cli_tokens_mint(cli_env):
    tmp_path, corpus_path = cli_env
    store = tmp_path / "store"
    runner = CliRunner()
    runner.invoke(cli_main, ["campaign", "create", "--store", str(store),
                             "--corpus", str(corpus_path)])
    result = runner.invoke(cli_main, ["tokens", "mint", "--store", str(store),
                                      "--name", "worker"])
    assert result.exit_code == 0
    assert "token:" in result.output


def test_cli_store_env_var(cli_env, monkeypatch):
    tmp_path, corpus_path = cli_env
    store = tmp_path / "store"
    runner = CliRunner()
    runner.invoke(cli_main, ["campaign", "create", "--store", str(store),
                             "--corpus", str(corpus_path)])
    monkeypatch.setenv("ABCEVAL_STORE", str(store))
    result = runner.invoke(cli_main, ["campaign", "status"])
    assert result.exit_code == 0


def test_cli_power_prints_replication_value():
    result = CliRunner().invoke(cli_main, ["power", "--d", "0.4", "--n", "100",
                                           "--alpha", "0.05"])
    assert result.exit_code == 0
    power = float(result.output.rsplit("power=", 1)[1])
    assert 0.78 <= power <= 0.82


def test_cli_power_needs_an_effect():
    result = CliRunner().invoke(cli_main, ["power", "--n", "100"])
    assert result.exit_code == 1


def test_cli_schema_prints_json():
    result = CliRunner().invoke(cli_main, ["schema"])
    assert result.exit_code == 0
    doc = json.loads(result.output)
    assert len(doc["tasks"]) == 18


def test_cli_analyze_deterministic(cli_env):
    tmp_path, corpus_path = cli_env
    store = tmp_path / "store"
    runner = CliRunner()
    runner.invoke(cli_main, ["campaign", "create", "--store", str(store),
                             "--corpus", str(corpus_path)])
    args = ["analyze", "--store", str(store), "--report", "power", "--seed", "7"]
    r1 = runner.invoke(cli_main, args + ["--out", str(tmp_path / "r1")])
    r2 = runner.invoke(cli_main, args + ["--out", str(tmp_path / "r2")])
    assert r1.exit_code == 0, r1.output
    assert r2.exit_code == 0
    for name in ("power.csv", "power.svg"):
        assert (tmp_path / "r1" / name).read_bytes() == (tmp_path / "r2" / name).read_bytes()


def test_cli_export_roundtrip(cli_env):
    tmp_path, corpus_path = cli_env
    store = tmp_path / "store"
    runner = CliRunner()
    runner.invoke(cli_main, ["campaign", "create", "--store", str(store),
                             "--corpus", str(corpus_path)])
    out = tmp_path / "export.jsonl"
    result = runner.invoke(cli_main, ["export", "--store", str(store),
                                      "--out", str(out)])
    assert result.exit_code == 0
    assert out.exists()
