"""HTTP API behavior through the ASGI app (no sockets; the acceptance
suite exercises a live server)."""

from __future__ import annotations

import json
import shutil

import pytest
from fastapi.testclient import TestClient

from coverdx.service import ServiceConfig, create_app, load_kb_dir, serve


@pytest.fixture
def service_dirs(tmp_path, kb3_path):
    kb_dir = tmp_path / "kb"
    kb_dir.mkdir()
    shutil.copy(kb3_path, kb_dir / "kb3.json")
    store = tmp_path / "sessions"
    return kb_dir, store


@pytest.fixture
def config(service_dirs):
    kb_dir, store = service_dirs
    return ServiceConfig(kb_dir=kb_dir, session_store=store, max_sessions=5)


@pytest.fixture
def client(config):
    return TestClient(create_app(config))


class TestKbEndpoints:
    def test_get_kb(self, client):
        response = client.get("/kb/kb3")
        assert response.status_code == 200
        assert len(response.json()["faults"]) == 3

    def test_get_unknown_kb(self, client):
        assert client.get("/kb/none").status_code == 404

    def test_put_kb_round_trips(self, client, kb3_json):
        doc = json.loads(kb3_json)
        doc["meta"]["name"] = "kb3b"
        response = client.put("/kb/kb3b", json=doc)
        assert response.status_code == 200
        assert client.get("/kb/kb3b").json()["meta"]["name"] == "kb3b"

    def test_put_invalid_kb_rejected_with_violations(self, client, kb3_json):
        doc = json.loads(kb3_json)
        doc["links"][0]["causal_strength"] = 2.0
        response = client.put("/kb/bad", json=doc)
        assert response.status_code == 422
        assert any("strength out of range" in v for v in response.json()["detail"]["violations"])


class TestSessionFlow:
    def test_create_answer_conclude(self, client):
        created = client.post("/sessions", json={"kb": "kb3"})
        assert created.status_code == 201
        body = created.json()
        session_id = body["id"]
        assert body["status"] == "in-progress"
        assert body["next_question"]["symptom"] in {"s1", "s2", "s3", "s4"}

        answered = client.post(
            f"/sessions/{session_id}/answers", json={"symptom": "s4", "finding": "present"}
        )
        assert answered.status_code == 200
        view = answered.json()
        assert view["status"] == "concluded"
        assert view["candidates"][0]["faults"] == ["f3"]
        assert view["candidates"][0]["posterior"] == pytest.approx(1.0)

        report = client.get(f"/sessions/{session_id}/summary").json()
        assert report["stopping_reason"] == "threshold-met"

    def test_session_config_passthrough(self, client):
        created = client.post(
            "/sessions",
            json={"kb": "kb3", "config": {"mode": "multiple-fault", "conclusion_threshold": 0.99}},
        )
        assert created.status_code == 201
        assert created.json()["next_question"] is None  # degenerate start, still open

    def test_bad_config_rejected(self, client):
        response = client.post(
            "/sessions", json={"kb": "kb3", "config": {"conclusion_threshold": 7}}
        )
        assert response.status_code == 422

    def test_unknown_kb_rejected(self, client):
        assert client.post("/sessions", json={"kb": "zzz"}).status_code == 404

    def test_answer_conflicts(self, client):
        session_id = client.post("/sessions", json={"kb": "kb3"}).json()["id"]
        first = client.post(
            f"/sessions/{session_id}/answers", json={"symptom": "s1", "finding": "absent"}
        )
        assert first.status_code == 200
        again = client.post(
            f"/sessions/{session_id}/answers", json={"symptom": "s1", "finding": "present"}
        )
        assert again.status_code == 409

    def test_answer_after_conclusion_conflicts(self, client):
        session_id = client.post("/sessions", json={"kb": "kb3"}).json()["id"]
        client.post(f"/sessions/{session_id}/answers", json={"symptom": "s4", "finding": "present"})
        response = client.post(
            f"/sessions/{session_id}/answers", json={"symptom": "s1", "finding": "present"}
        )
        assert response.status_code == 409

    def test_unknown_symptom_rejected(self, client):
        session_id = client.post("/sessions", json={"kb": "kb3"}).json()["id"]
        response = client.post(
            f"/sessions/{session_id}/answers", json={"symptom": "s99", "finding": "present"}
        )
        assert response.status_code == 422

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/deadbeef").status_code == 404
        assert (
            client.post("/sessions/deadbeef/answers", json={"symptom": "s1", "finding": "absent"}).status_code
            == 404
        )

    def test_capacity_limit(self, client):
        for _ in range(5):
            assert client.post("/sessions", json={"kb": "kb3"}).status_code == 201
        assert client.post("/sessions", json={"kb": "kb3"}).status_code == 429


class TestWhatIf:
    def test_preview_does_not_mutate(self, client):
        session_id = client.post("/sessions", json={"kb": "kb3"}).json()["id"]
        before = client.get(f"/sessions/{session_id}").json()
        preview = client.post(
            f"/sessions/{session_id}/whatif", json={"symptom": "s4", "finding": "present"}
        )
        assert preview.status_code == 200
        assert preview.json()["status"] == "concluded"
        after = client.get(f"/sessions/{session_id}").json()
        assert before == after

    def test_preview_matches_real_answer(self, client):
        session_id = client.post("/sessions", json={"kb": "kb3"}).json()["id"]
        preview = client.post(
            f"/sessions/{session_id}/whatif", json={"symptom": "s2", "finding": "present"}
        ).json()
        real = client.post(
            f"/sessions/{session_id}/answers", json={"symptom": "s2", "finding": "present"}
        ).json()
        assert preview == real


class TestConcurrency:
    def test_racing_answers_serialize_to_exactly_one_win(self, client):
        import threading

        session_id = client.post("/sessions", json={"kb": "kb3"}).json()["id"]
        codes = []
        barrier = threading.Barrier(4)

        def fire():
            barrier.wait()
            response = client.post(
                f"/sessions/{session_id}/answers",
                json={"symptom": "s1", "finding": "absent"},
            )
            codes.append(response.status_code)

        threads = [threading.Thread(target=fire) for _ in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()

        assert sorted(codes) == [200, 409, 409, 409]
        view = client.get(f"/sessions/{session_id}").json()
        assert view["transcript"] == [{"symptom": "s1", "finding": "absent"}]

    def test_independent_sessions_do_not_interfere(self, client):
        ids = [client.post("/sessions", json={"kb": "kb3"}).json()["id"] for _ in range(3)]
        for i, session_id in enumerate(ids):
            finding = "present" if i == 0 else "absent"
            client.post(
                f"/sessions/{session_id}/answers", json={"symptom": "s4", "finding": finding}
            )
        statuses = [client.get(f"/sessions/{sid}").json()["status"] for sid in ids]
        assert statuses[0] == "concluded"
        assert statuses[1] == statuses[2] == "in-progress"


class TestPersistence:
    def test_transcript_files_are_appended(self, config):
        client = TestClient(create_app(config))
        session_id = client.post("/sessions", json={"kb": "kb3"}).json()["id"]
        client.post(f"/sessions/{session_id}/answers", json={"symptom": "s1", "finding": "absent"})
        lines = (config.session_store / f"{session_id}.jsonl").read_text().splitlines()
        assert json.loads(lines[0])["kb"] == "kb3"
        assert json.loads(lines[1]) == {"symptom": "s1", "finding": "absent"}

    def test_restart_recovers_sessions_exactly(self, config):
        client = TestClient(create_app(config))
        session_id = client.post(
            "/sessions", json={"kb": "kb3", "config": {"conclusion_threshold": 0.9}}
        ).json()["id"]
        client.post(f"/sessions/{session_id}/answers", json={"symptom": "s2", "finding": "present"})
        client.post(f"/sessions/{session_id}/answers", json={"symptom": "s1", "finding": "unknown"})
        before = client.get(f"/sessions/{session_id}").json()
        before_summary = client.get(f"/sessions/{session_id}/summary").json()

        restarted = TestClient(create_app(config))  # same dirs, fresh process state
        assert restarted.get(f"/sessions/{session_id}").json() == before
        assert restarted.get(f"/sessions/{session_id}/summary").json() == before_summary


def test_load_kb_dir_rejects_invalid_documents(tmp_path, kb3_json):
    doc = json.loads(kb3_json)
    doc["links"][0]["causal_strength"] = 5
    (tmp_path / "bad.json").write_text(json.dumps(doc))
    with pytest.raises(Exception) as err:
        load_kb_dir(tmp_path)
    assert "strength out of range" in str(err.value)


def test_serve_requires_a_kb(tmp_path):
    from coverdx.errors import ConfigError

    with pytest.raises(ConfigError):
        serve(ServiceConfig(kb_dir=tmp_path, session_store=tmp_path / "s"))
