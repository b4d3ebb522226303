import asyncio
import logging
import time
import uuid

import httpx
import pytest
from fastapi.testclient import TestClient

from noetherq import api
from noetherq.jobs import RunQueue, RunStore


@pytest.fixture
def client(api_key):
    with TestClient(api.app) as test_client:
        test_client.headers["X-API-Key"] = api_key
        yield test_client


def _wait_for(client: TestClient, run_id: str, timeout: float = 30.0) -> dict:
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        entry = client.get(f"/runs/{run_id}").json()
        if entry["status"] in ("completed", "failed"):
            return entry
        time.sleep(0.05)
    raise AssertionError(f"run {run_id} did not finish within {timeout}s")


def test_requests_need_the_api_key(client):
    assert client.get("/models/", headers={"X-API-Key": "wrong"}).status_code == 401
    del client.headers["X-API-Key"]
    assert client.get("/models/").status_code == 401


def test_list_models(client):
    response = client.get("/models/")
    assert response.status_code == 200
    assert response.json() == {"models": ["bateman", "free_particle", "harmonic"]}


def test_derive_run_completes(client):
    response = client.post("/runs/", json={"command": "derive", "model": "bateman"})
    assert response.status_code == 202
    body = response.json()
    assert body["status"] == "queued"

    entry = _wait_for(client, body["run_id"])
    assert entry["status"] == "completed"
    assert entry["passed"] is True
    assert entry["report"]["command"] == "derive"
    assert entry["report"]["model"] == "bateman"


def test_inline_model_run(client):
    model_text = "[model]\nname = spring\ncoordinates = x\nlagrangian = xd^2/2 - x^2/2\n"
    run_id = str(uuid.uuid4())
    response = client.post(
        "/runs/",
        json={"run_id": run_id, "command": "noether", "model_text": model_text},
    )
    assert response.json()["run_id"] == run_id
    entry = _wait_for(client, run_id)
    assert entry["status"] == "completed"
    assert entry["report"]["model"] == "spring"


def test_failing_run_is_stored(client):
    model_text = "[model]\nname = bad\ncoordinates = x\nlagrangian = xd^2 - k*x\n"
    response = client.post("/runs/", json={"command": "derive", "model_text": model_text})
    entry = _wait_for(client, response.json()["run_id"])
    assert entry["status"] == "failed"
    assert "k" in entry["error"]


def test_options_are_forwarded(client):
    response = client.post(
        "/runs/",
        json={"command": "verify-quantum", "options": {"gamma": 2.0}},
    )
    entry = _wait_for(client, response.json()["run_id"])
    assert entry["status"] == "failed"
    assert "ω²" in entry["error"]


@pytest.mark.parametrize(
    "payload",
    [
        {"command": "simulate"},
        {"command": "derive", "model": "bateman", "model_text": "[model]"},
        {"command": "derive", "options": {"grid_n": 4}},
        {"command": "derive", "options": {"colour": "red"}},
    ],
)
def test_invalid_runs_are_rejected(client, payload):
    assert client.post("/runs/", json=payload).status_code == 422


def test_unknown_run_is_404(client):
    response = client.get(f"/runs/{uuid.uuid4()}")
    assert response.status_code == 404


def test_callback_receives_entry(client, monkeypatch):
    calls = []

    async def fake_post(url, payload):
        calls.append((url, payload["status"]))

    monkeypatch.setattr(api, "send_post_request", fake_post)
    response = client.post(
        "/runs/",
        json={"command": "derive", "callback_url": "http://callback.invalid/done"},
    )
    _wait_for(client, response.json()["run_id"])
    deadline = time.monotonic() + 5
    while not calls and time.monotonic() < deadline:
        time.sleep(0.05)
    assert calls == [("http://callback.invalid/done", "completed")]


CALLBACK = "http://callback.invalid/done"
_request = httpx.Request("POST", CALLBACK)


@pytest.mark.parametrize(
    "error, message",
    [
        (httpx.ConnectError("connection refused", request=_request), "could not reach"),
        (
            httpx.HTTPStatusError(
                "unavailable", request=_request, response=httpx.Response(503, request=_request)
            ),
            "with status 503",
        ),
        (RuntimeError("payload"), "failed"),
    ],
)
def test_failed_callback_is_logged_with_the_run(monkeypatch, caplog, error, message):
    async def failing_post(url, payload):
        raise error

    monkeypatch.setattr(api, "send_post_request", failing_post)
    run = api.RunIn(command="derive", callback_url=CALLBACK)
    with caplog.at_level(logging.ERROR, logger="noetherq"):
        delivered = asyncio.run(api.notify_callback(run, {"status": "completed"}))
    assert delivered is False
    (record,) = [r for r in caplog.records if str(run.run_id) in r.getMessage()]
    assert message in record.getMessage()


def test_delivered_callback(monkeypatch):
    async def fake_post(url, payload):
        assert payload == {"status": "failed"}

    monkeypatch.setattr(api, "send_post_request", fake_post)
    run = api.RunIn(command="noether", callback_url=CALLBACK)
    assert asyncio.run(api.notify_callback(run, {"status": "failed"})) is True


# --------------------------------------------------------------------------- #
# Queue and store
# --------------------------------------------------------------------------- #
class FakeClock:
    def __init__(self):
        self.now = 0.0

    def __call__(self) -> float:
        return self.now


def test_store_entries_expire():
    clock = FakeClock()
    store = RunStore(ttl=10, clock=clock)
    first, second = uuid.uuid4(), uuid.uuid4()

    async def scenario():
        await store.put(first, {"status": "queued"})
        clock.now = 5.0
        await store.put(second, {"status": "queued"}, ttl=100)
        assert await store.get(first) == {"status": "queued"}
        clock.now = 10.5
        assert await store.get(first) is None
        assert await store.get(second) == {"status": "queued"}
        assert len(store) == 1

    asyncio.run(scenario())


def test_queue_survives_failing_items():
    seen = []

    async def process(item):
        if item == "boom":
            raise RuntimeError("boom")
        seen.append(item)

    async def scenario():
        queue = RunQueue()
        queue.start(process)
        for item in ("a", "boom", "b"):
            await queue.enqueue(item)
        await queue.join()
        assert len(queue) == 0
        await queue.close()

    asyncio.run(scenario())
    assert seen == ["a", "b"]
