import http.client
import json
import re
import subprocess
import sys
import threading
import time

import pytest

from faqmatch.kb import ingest, save
from faqmatch.encoder import save_params
from faqmatch.service import Engine, make_server

from conftest import kb_encoder_params, synthetic_kb

RECORDS = [
    {"id": "q1", "question": "What causes fabry disease?", "answer": "It is genetic. Enzymes are missing."},
    {"id": "q2", "question": "What is acid reflux?", "answer": "Stomach acid rises. Diet helps. Avoid coffee."},
    {"id": "q3", "question": "How is strep treated?", "answer": "Antibiotics. Rest. Fluids."},
]


@pytest.fixture
def engine():
    kb = ingest(RECORDS)
    return Engine(kb=kb, params=kb_encoder_params(kb, seed=0, dim=8))


@pytest.fixture
def server(engine):
    srv = make_server(engine, port=0)
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield srv
    srv.shutdown()
    srv.server_close()


def request(port: int, method: str, path: str, body: dict | None = None):
    conn = http.client.HTTPConnection("127.0.0.1", port, timeout=10)
    try:
        payload = json.dumps(body).encode() if body is not None else None
        headers = {"Content-Type": "application/json"} if payload else {}
        conn.request(method, path, body=payload, headers=headers)
        response = conn.getresponse()
        return response.status, response.read()
    finally:
        conn.close()


class TestHealth:
    def test_loaded_engine(self, server):
        status, body = request(server.port, "GET", "/health")
        assert status == 200
        assert json.loads(body) == {"status": "ok", "entries": 3}

    def test_503_while_loading(self):
        srv = make_server(None, port=0)
        thread = threading.Thread(target=srv.serve_forever, daemon=True)
        thread.start()
        try:
            status, body = request(srv.port, "GET", "/health")
            assert status == 503
            assert "loading" in json.loads(body)["error"]
            status, _ = request(srv.port, "POST", "/query", {"question": "x"})
            assert status == 503
        finally:
            srv.shutdown()
            srv.server_close()

    def test_unknown_path(self, server):
        status, _ = request(server.port, "GET", "/nope")
        assert status == 404


class TestQueryRoute:
    def test_basic_query(self, server):
        status, body = request(server.port, "POST", "/query", {"question": "What is acid reflux?"})
        assert status == 200
        payload = json.loads(body)
        assert payload["matched_faq"]["id"] == "q2"
        assert payload["matched_faq"]["score"] == pytest.approx(1.0)
        assert len(payload["answers"]) == 3
        assert set(payload["timing_ms"]) == {"match", "select", "total"}

    def test_k_n_overrides(self, server):
        status, body = request(server.port, "POST", "/query", {"question": "acid reflux", "n": 1})
        assert status == 200
        assert len(json.loads(body)["answers"]) == 1

    def test_timing_opt_out(self, server):
        status, body = request(server.port, "POST", "/query", {"question": "acid", "timing": False})
        assert status == 200
        assert "timing_ms" not in json.loads(body)

    def test_empty_question_400(self, server):
        status, body = request(server.port, "POST", "/query", {"question": "  "})
        assert status == 400
        assert "question" in json.loads(body)["error"]

    def test_missing_question_400(self, server):
        status, _ = request(server.port, "POST", "/query", {"q": "x"})
        assert status == 400

    def test_malformed_json_400(self, server):
        conn = http.client.HTTPConnection("127.0.0.1", server.port, timeout=10)
        try:
            conn.request("POST", "/query", body=b"{not json", headers={"Content-Type": "application/json"})
            response = conn.getresponse()
            assert response.status == 400
        finally:
            conn.close()

    def test_bad_k_400(self, server):
        status, _ = request(server.port, "POST", "/query", {"question": "x", "k": 0})
        assert status == 400
        status, _ = request(server.port, "POST", "/query", {"question": "x", "k": "three"})
        assert status == 400

    def test_punctuation_only_question_400(self, server):
        status, _ = request(server.port, "POST", "/query", {"question": "?!"})
        assert status == 400


class TestServeCommand:
    def test_serve_subprocess_round_trip(self, tmp_path):
        kb = ingest(RECORDS)
        index_path = tmp_path / "index.json"
        params_path = tmp_path / "params.txt"
        save(kb, str(index_path))
        save_params(kb_encoder_params(kb, seed=2, dim=8), str(params_path))

        proc = subprocess.Popen(
            [sys.executable, "-m", "faqmatch.cli", "serve",
             "--index", str(index_path), "--params", str(params_path), "--port", "0"],
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
        )
        try:
            port = None
            deadline = time.monotonic() + 30
            while time.monotonic() < deadline and port is None:
                line = proc.stderr.readline()
                match = re.search(r"serving on port (\d+)", line or "")
                if match:
                    port = int(match.group(1))
            assert port, "server never reported its port"

            status = body = None
            while time.monotonic() < deadline:
                status, body = request(port, "GET", "/health")
                if status == 200:
                    break
                assert status == 503  # index still loading
                time.sleep(0.05)
            assert status == 200
            assert json.loads(body)["entries"] == 3

            status, body = request(port, "POST", "/query", {"question": "acid reflux"})
            assert status == 200
            assert json.loads(body)["matched_faq"]["id"] == "q2"
        finally:
            proc.terminate()
            proc.wait(timeout=10)


class TestConcurrency:
    def test_concurrent_bodies_match_serial(self):
        kb = synthetic_kb(seed=61, n_entries=120, vocab_size=150)
        engine = Engine(kb=kb, params=kb_encoder_params(kb, seed=61, dim=12))
        srv = make_server(engine, port=0)
        thread = threading.Thread(target=srv.serve_forever, daemon=True)
        thread.start()
        try:
            queries = [
                {"question": " ".join(kb.entries[i * 2].question.tokens[:4]), "timing": False}
                for i in range(25)
            ]
            serial = [request(srv.port, "POST", "/query", q) for q in queries]
            assert all(status == 200 for status, _ in serial)

            n_clients = 50
            results: list[list[bytes]] = [None] * n_clients

            def client(slot: int) -> None:
                bodies = []
                for q in queries:
                    status, body = request(srv.port, "POST", "/query", q)
                    assert status == 200
                    bodies.append(body)
                results[slot] = bodies

            threads = [threading.Thread(target=client, args=(i,)) for i in range(n_clients)]
            for t in threads:
                t.start()
            for t in threads:
                t.join(timeout=120)
            serial_bodies = [body for _, body in serial]
            for slot in range(n_clients):
                assert results[slot] is not None, f"client {slot} did not finish"
                assert results[slot] == serial_bodies
        finally:
            srv.shutdown()
            srv.server_close()
