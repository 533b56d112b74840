import json
import socket
import threading

import pytest
from fastapi.testclient import TestClient

from semxai.explain import exposed_feature_ids
from semxai.service import MissingOutputs, PortInUse, Snapshot, check_port, create_app

IDS = list("ABCDEFGHIJKLM")


@pytest.fixture(scope="module")
def client(fixture_run):
    _, out = fixture_run
    return TestClient(create_app(out))


def test_listing_and_health(client):
    assert client.get("/health").json()["explanations"] == 15
    assert client.get("/materials").json() == {"materials": ["M1", "M2", "M3", "M4", "M5"]}


def test_forecast_matches_file(client, fixture_run):
    _, out = fixture_run
    on_disk = {(r["material"], r["month"]): r for r in map(json.loads, (out / "predictions.jsonl").read_text().splitlines())}
    body = client.get("/forecasts/M1", params={"month": "2020-06"}).json()
    assert body["value"] == on_disk[("M1", "2020-06")]["value"]
    assert client.get("/forecasts/M1").json() == body
    assert client.get("/forecasts/M9").status_code == 404
    assert client.get("/forecasts/M1", params={"month": "2019-01"}).status_code == 404
    assert client.get("/forecasts/M1", params={"month": "June"}).status_code == 400


def test_explanation_profiles(client):
    resp = client.get("/explanations/M3-2020-05", params={"profile": "planner"})
    assert resp.status_code == 200 and resp.headers["content-type"].startswith("application/json")
    assert exposed_feature_ids(resp.json(), IDS) == []
    assert "keywords" not in resp.json()
    expert = client.get("/explanations/M3-2020-05", params={"profile": "expert"}).json()
    assert set(resp.json()) <= set(expert) and "dataset" in expert
    assert client.get("/explanations/nope").status_code == 404
    assert client.get("/explanations/M3-2020-05", params={"profile": "auditor"}).status_code == 400


def test_concurrent_reads_consistent(client):
    first = client.get("/explanations/M2-2020-04").json()
    results = []

    def hit():
        results.append(client.get("/explanations/M2-2020-04").json())

    threads = [threading.Thread(target=hit) for _ in range(16)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(r == first for r in results)


def test_snapshot_checks(fixture_run, tmp_path):
    with pytest.raises(MissingOutputs):
        Snapshot(tmp_path)
    _, out = fixture_run
    for name in ("explanations.jsonl", "predictions.jsonl"):
        (tmp_path / name).write_bytes((out / name).read_bytes())
    (tmp_path / "kg.jsonl").write_text("")
    with pytest.raises(ValueError, match="explains edge"):
        Snapshot(tmp_path)
    assert Snapshot(out).kg.read_only


def test_port_in_use():
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        sock.listen()
        with pytest.raises(PortInUse):
            check_port("127.0.0.1", sock.getsockname()[1])
