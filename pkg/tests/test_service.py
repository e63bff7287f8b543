"""HTTP session service: lifecycle, validation, durability, concurrency."""

import json
import time

import pytest
from fastapi.testclient import TestClient

from prefpareto.service import create_app


def make_client(tmp_path, **kw):
    app = create_app(data_dir=str(tmp_path / "data"), **kw)
    return TestClient(app)


def create_live(client, budget=1, initial_pairs=2, problem="dtlz7-5-3", **extra):
    body = {
        "problem": problem,
        "variant": "int-obj",
        "budget": budget,
        "initial_pairs": initial_pairs,
        "dm_mode": "live",
        "seed": 7,
        "fit_iters": 60,
        "eval_budget": 120,
        "restarts": 2,
        **extra,
    }
    resp = client.post("/v1/sessions", json=body)
    assert resp.status_code == 201, resp.text
    return resp.json()["id"]


def wait_ready(client, sid, timeout=60.0):
    """Poll until the session is not busy; returns the state doc."""
    deadline = time.time() + timeout
    while time.time() < deadline:
        doc = client.get(f"/v1/sessions/{sid}").json()
        if doc["status"] != "busy" and not doc["busy"]:
            return doc
        time.sleep(0.05)
    raise TimeoutError("session stayed busy")


def answer_current(client, sid, choice=1):
    query = client.get(f"/v1/sessions/{sid}/query")
    assert query.status_code == 200, query.text
    doc = query.json()
    resp = client.post(
        f"/v1/sessions/{sid}/response", json={"seq": doc["seq"], "choice": choice}
    )
    assert resp.status_code == 202, resp.text
    return doc


class TestProblemCatalog:
    def test_lists_catalog(self, tmp_path):
        client = make_client(tmp_path)
        doc = client.get("/v1/problems").json()
        ids = [p["id"] for p in doc["problems"]]
        assert "dtlz2-9-6" in ids and "carcab-7-9" in ids
        entry = next(p for p in doc["problems"] if p["id"] == "dtlz7-5-3")
        assert entry["d"] == 5 and entry["m"] == 3
        assert len(entry["orientations"]) == 3


class TestCreateSession:
    def test_valid_request_starts_awaiting(self, tmp_path):
        client = make_client(tmp_path)
        sid = create_live(client)
        doc = client.get(f"/v1/sessions/{sid}").json()
        assert doc["status"] == "collecting-initial"
        assert doc["has_pending_query"]

    def test_negative_budget_rejected(self, tmp_path):
        client = make_client(tmp_path)
        resp = client.post(
            "/v1/sessions",
            json={"problem": "dtlz7-5-3", "budget": -1, "dm_mode": "live"},
        )
        assert resp.status_code == 400
        assert resp.json()["field"] == "budget"

    def test_unknown_problem_rejected(self, tmp_path):
        client = make_client(tmp_path)
        resp = client.post("/v1/sessions", json={"problem": "zdt1-30-2"})
        assert resp.status_code == 400

    def test_idempotency_key(self, tmp_path):
        client = make_client(tmp_path)
        body = {
            "problem": "dtlz7-5-3", "variant": "int-obj", "budget": 1,
            "initial_pairs": 2, "dm_mode": "live", "seed": 3,
            "idempotency_key": "abc",
        }
        first = client.post("/v1/sessions", json=body)
        assert first.status_code == 201
        second = client.post("/v1/sessions", json=body)
        assert second.status_code == 200
        assert second.json()["id"] == first.json()["id"]
        conflicting = dict(body, budget=2)
        third = client.post("/v1/sessions", json=conflicting)
        assert third.status_code == 409

    def test_unknown_session_404(self, tmp_path):
        client = make_client(tmp_path)
        assert client.get("/v1/sessions/nope").status_code == 404
        assert client.get("/v1/sessions/nope/query").status_code == 404
        assert client.get("/v1/sessions/nope/menu").status_code == 404


class TestQueryAndResponse:
    def test_query_document_shape(self, tmp_path):
        client = make_client(tmp_path)
        sid = create_live(client)
        doc = client.get(f"/v1/sessions/{sid}/query").json()
        assert doc["seq"] == 0
        assert len(doc["options"]) == 2
        assert len(doc["options"][0]["objectives"]) == 3
        assert doc["orientations"] == ["min", "min", "min"]
        assert "decision" not in doc["options"][0]
        with_dec = client.get(f"/v1/sessions/{sid}/query?decisions=true").json()
        assert len(with_dec["options"][0]["decision"]) == 5

    def test_repeated_get_is_idempotent(self, tmp_path):
        client = make_client(tmp_path)
        sid = create_live(client)
        a = client.get(f"/v1/sessions/{sid}/query").json()
        b = client.get(f"/v1/sessions/{sid}/query").json()
        assert a == b

    def test_full_live_loop(self, tmp_path):
        client = make_client(tmp_path)
        sid = create_live(client, budget=1, initial_pairs=2)
        answer_current(client, sid, 1)
        answer_current(client, sid, 2)  # last initial answer triggers a refit
        wait_ready(client, sid)
        doc = answer_current(client, sid, 1)  # the single elicited query
        assert doc["origin"] == "elicited"
        state = wait_ready(client, sid)
        assert state["status"] == "finished"
        menu = client.get(f"/v1/sessions/{sid}/menu?k=2")
        assert menu.status_code == 200
        mdoc = menu.json()
        assert mdoc["k"] == 2
        assert len(mdoc["objectives"]) == 2

    def test_invalid_choice_rejected(self, tmp_path):
        client = make_client(tmp_path)
        sid = create_live(client)
        resp = client.post(f"/v1/sessions/{sid}/response", json={"seq": 0, "choice": 3})
        assert resp.status_code == 400

    def test_duplicate_sequence_rejected(self, tmp_path):
        client = make_client(tmp_path)
        sid = create_live(client, initial_pairs=3)
        answer_current(client, sid, 1)
        resp = client.post(f"/v1/sessions/{sid}/response", json={"seq": 0, "choice": 2})
        assert resp.status_code == 409
        # state unchanged: next pending query is still seq 1
        assert client.get(f"/v1/sessions/{sid}/query").json()["seq"] == 1

    def test_out_of_order_rejected(self, tmp_path):
        client = make_client(tmp_path)
        sid = create_live(client, initial_pairs=3)
        resp = client.post(f"/v1/sessions/{sid}/response", json={"seq": 5, "choice": 1})
        assert resp.status_code == 409

    def test_menu_requires_finished(self, tmp_path):
        client = make_client(tmp_path)
        sid = create_live(client)
        resp = client.get(f"/v1/sessions/{sid}/menu")
        assert resp.status_code == 409

    def test_finished_query_points_to_menu(self, tmp_path):
        client = make_client(tmp_path)
        sid = create_live(client, budget=0, initial_pairs=2)
        answer_current(client, sid, 1)
        answer_current(client, sid, 1)
        wait_ready(client, sid)
        resp = client.get(f"/v1/sessions/{sid}/query")
        assert resp.status_code == 409
        assert "menu" in resp.json()

    def test_menu_prefix_nesting(self, tmp_path):
        client = make_client(tmp_path)
        sid = create_live(client, budget=0, initial_pairs=3)
        for _ in range(3):
            answer_current(client, sid, 1)
        wait_ready(client, sid)
        m1 = client.get(f"/v1/sessions/{sid}/menu?k=1").json()
        m4 = client.get(f"/v1/sessions/{sid}/menu?k=4").json()
        assert m4["indices"][:1] == m1["indices"]
        assert m4["prefix_values"][0] == m1["prefix_values"][0]


class TestSimulatedMode:
    def test_runs_to_completion(self, tmp_path):
        client = make_client(tmp_path)
        resp = client.post(
            "/v1/sessions",
            json={
                "problem": "dtlz7-5-3", "variant": "int-obj", "budget": 1,
                "initial_pairs": 2, "dm_mode": "simulated", "seed": 11,
                "fit_iters": 60, "eval_budget": 120, "restarts": 2,
            },
        )
        assert resp.status_code == 201
        sid = resp.json()["id"]
        state = wait_ready(client, sid)
        assert state["status"] == "finished"
        menu = client.get(f"/v1/sessions/{sid}/menu?k=1")
        assert menu.status_code == 200


class TestDurability:
    def test_crash_recovery_preserves_accepted_responses(self, tmp_path):
        client = make_client(tmp_path)
        sid = create_live(client, budget=1, initial_pairs=3)
        answer_current(client, sid, 1)
        answer_current(client, sid, 2)
        # simulate a crash: new app instance over the same data directory
        client2 = make_client(tmp_path)
        doc = client2.get(f"/v1/sessions/{sid}").json()
        assert doc["status"] == "collecting-initial"
        query = client2.get(f"/v1/sessions/{sid}/query").json()
        assert query["seq"] == 2  # both accepted responses survived
        # duplicate of an old sequence number is still rejected after restart
        dup = client2.post(f"/v1/sessions/{sid}/response", json={"seq": 0, "choice": 1})
        assert dup.status_code == 409

    def test_recovery_mid_elicitation(self, tmp_path):
        client = make_client(tmp_path)
        sid = create_live(client, budget=2, initial_pairs=2)
        answer_current(client, sid, 1)
        answer_current(client, sid, 1)
        wait_ready(client, sid)
        first = client.get(f"/v1/sessions/{sid}/query").json()
        client2 = make_client(tmp_path)
        wait_ready(client2, sid)
        again = client2.get(f"/v1/sessions/{sid}/query").json()
        assert again["seq"] == first["seq"]
        assert again["options"] == first["options"]

    def test_torn_final_log_line_recovered(self, tmp_path):
        client = make_client(tmp_path)
        sid = create_live(client, initial_pairs=3)
        answer_current(client, sid, 1)
        log = tmp_path / "data" / f"{sid}.ndjson"
        with open(log, "a") as fh:
            fh.write('{"kind": "resp')  # crash mid-append
        client2 = make_client(tmp_path)
        assert client2.get(f"/v1/sessions/{sid}/query").json()["seq"] == 1
        # the rewritten log is clean ndjson again
        for line in log.read_text().splitlines():
            json.loads(line)

    def test_log_is_ndjson_with_header(self, tmp_path):
        client = make_client(tmp_path)
        sid = create_live(client)
        log = tmp_path / "data" / f"{sid}.ndjson"
        lines = log.read_text().splitlines()
        header = json.loads(lines[0])
        assert header["kind"] == "header"
        assert header["schema_version"] == 1


class TestAuth:
    def test_bearer_token(self, tmp_path):
        client = make_client(tmp_path, auth_token="sesame")
        assert client.get("/v1/problems").status_code == 401
        ok = client.get("/v1/problems", headers={"Authorization": "Bearer sesame"})
        assert ok.status_code == 200
