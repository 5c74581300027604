import json

import pytest
from fastapi.testclient import TestClient

from gatelab import generate
from gatelab.service import create_app
from gatelab.session import Session
from gatelab.trace import EventLog


@pytest.fixture
def client_session(tmp_path):
    proj = generate.fsm_sea_of_gates(seed=2, padding=80)
    log = EventLog(tmp_path / "events.jsonl", session_id="svc")
    session = Session(proj.netlist, log)
    app = create_app(session)
    with TestClient(app) as client:
        yield client, session, proj


def test_summary(client_session):
    client, session, proj = client_session
    r = client.get("/netlist/summary")
    assert r.status_code == 200
    body = r.json()
    assert body["gates"] == len(session.netlist.gates)
    assert body["digest"] == session.digest()


def test_graph_window_two_hops(client_session):
    client, session, proj = client_session
    center = proj.sidecar["fsm_ff_ids"][0]
    r = client.get(f"/graph?center={center}&radius=2")
    assert r.status_code == 200
    body = r.json()
    ids = {n["id"] for n in body["nodes"]}
    assert center in ids
    direct = (session.netlist.neighbors(center, "fanin")
              | session.netlist.neighbors(center, "fanout"))
    assert direct <= ids
    for u, v in body["edges"]:
        assert u in ids and v in ids


def test_gate_details_include_function(client_session):
    client, session, proj = client_session
    gid = proj.sidecar["fsm_ff_ids"][0]
    r = client.get(f"/gate/{gid}")
    assert r.status_code == 200
    body = r.json()
    assert body["type"] == "FF"
    assert "D" in body["pins"]
    missing = client.get("/gate/999999")
    assert missing.status_code == 404
    assert missing.json()["code"] == "UnknownGate"


def test_submodule_create_and_event_stream(client_session):
    client, session, proj = client_session
    r = client.post("/submodules", json={"name": "fsm"})
    assert r.status_code == 201
    sid = r.json()["id"]
    r2 = client.post(f"/submodules/{sid}/gates",
                     json={"gates": proj.sidecar["fsm_ff_ids"]})
    assert r2.status_code == 200
    assert set(r2.json()["gates"]) == set(proj.sidecar["fsm_ff_ids"])

    # both mutations appear on the stream, in order, as user actions
    r3 = client.get("/events/stream?since=0&follow=false")
    events = [json.loads(line[len("data: "):])
              for line in r3.text.splitlines() if line.startswith("data: ")]
    ops = [e["op"] for e in events]
    assert ops[0] == "session_start"
    assert ops[-2:] == ["create_submodule", "assign_gates"]
    assert [e["actor"] for e in events[-2:]] == ["user", "user"]
    seqs = [e["seq"] for e in events]
    assert seqs == sorted(seqs)


def test_command_endpoint_parity_with_direct_channel(tmp_path):
    # the same verb via HTTP and via the library must produce identical state
    proj_a = generate.fsm_sea_of_gates(seed=5, padding=60)
    proj_b = generate.fsm_sea_of_gates(seed=5, padding=60)
    session_a = Session(proj_a.netlist, EventLog(None, session_id="a"))
    session_b = Session(proj_b.netlist, EventLog(None, session_id="b"))
    app = create_app(session_a)

    from gatelab import commands
    lines = ["submodule new fsm",
             "submodule add fsm "
             + " ".join(str(f) for f in proj_a.sidecar["fsm_ff_ids"]),
             "lint"]
    with TestClient(app) as client:
        for line in lines:
            r = client.post("/command", json={"line": line})
            assert r.status_code == 200, r.text
            commands.run_command(session_b, line)
    assert session_a.digest() == session_b.digest()


def test_command_endpoint_error_mapping(client_session):
    client, session, proj = client_session
    r = client.post("/command", json={"line": "frobnicate"})
    assert r.status_code == 404
    assert r.json()["code"] == "UnknownCommand"
    r2 = client.post("/command", json={})
    assert r2.status_code == 400
    assert r2.json()["code"] == "ArgumentError"
    r3 = client.post("/submodules", json={"name": ""})
    assert r3.status_code == 400


def test_trace_endpoint(client_session):
    client, session, proj = client_session
    probe = f"fsm_q0"
    r = client.get(f"/trace?probe={probe}&cycles=8&seed=1")
    assert r.status_code == 200
    body = r.json()
    assert body["probes"] == [probe]
    assert len(body["csv"].splitlines()) == 10  # header + 9 rows


def test_events_backlog_since(client_session):
    client, session, proj = client_session
    client.post("/submodules", json={"name": "one"})
    client.post("/submodules", json={"name": "two"})
    all_events = client.get("/events?since=0").json()
    tail = client.get(f"/events?since={all_events[-1]['seq']}").json()
    assert len(tail) == 1
    assert tail[0]["op"] == "create_submodule"
