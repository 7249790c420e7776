"""Store tests: registry, durable logs, replay consistency, reports."""

import hashlib
import json

import pytest

from imigame.errors import DuplicateId, SessionClosed, UnknownParticipant
from imigame.store import (
    ParticipantProfile, SessionLog, SessionStore, default_participants,
    ensure_default_participants, render_report, report_json, report_rows,
)


@pytest.fixture
def store(tmp_path):
    s = SessionStore(tmp_path / "store")
    ensure_default_participants(s)
    return s


# -- registry -------------------------------------------------------------------

def test_register_and_fetch_table_values(store):
    f = store.get_participant("F")
    assert (f.biological_age, f.nd_age, f.cars_score) == (18, 9, 33)


def test_fractional_nd_age(store):
    assert store.get_participant("I").nd_age == 0.5


def test_duplicate_id(store):
    with pytest.raises(DuplicateId):
        store.register_participant(default_participants()[0])


def test_unknown_participant(store):
    with pytest.raises(UnknownParticipant):
        store.get_participant("Z")
    with pytest.raises(UnknownParticipant):
        store.open_session("Z")


def test_profile_validation():
    with pytest.raises(ValueError):
        ParticipantProfile(id="X", biological_age=10, nd_age=5, cars_score=0)
    with pytest.raises(ValueError):
        ParticipantProfile(id="X", biological_age=0, nd_age=5, cars_score=30)


def test_two_sessions_same_participant_distinct_ids(store):
    e1, l1 = store.open_session("F")
    l1.close()
    e2, l2 = store.open_session("F")
    l2.close()
    assert e1.session_id != e2.session_id


# -- log durability ----------------------------------------------------------------

def test_append_then_reopen(tmp_path):
    path = tmp_path / "x.log.ndjson"
    log = SessionLog(path)
    log.append({"seq": 0, "t_ms": 1, "phase": "greetings",
                "payload": {"type": "observe", "kind": "Smile"}})
    # simulate a crash: re-read without closing
    lines = path.read_text().splitlines()
    assert len(lines) == 1
    assert json.loads(lines[0])["payload"]["kind"] == "Smile"
    log.close()


def test_append_to_closed(tmp_path):
    log = SessionLog(tmp_path / "x.log.ndjson")
    log.close()
    with pytest.raises(SessionClosed):
        log.append({"seq": 0})


def test_bulk_append_order_preserved(tmp_path):
    path = tmp_path / "bulk.log.ndjson"
    log = SessionLog(path)
    for i in range(10000):
        log.append({"seq": i, "t_ms": i, "phase": "greetings",
                    "payload": {"type": "observe", "kind": "Smile"}})
    log.close()
    seqs = [json.loads(line)["seq"] for line in path.read_text().splitlines()]
    assert seqs == list(range(10000))


def test_log_never_mutated_by_later_operations(store):
    engine, log = store.open_session("F")
    engine.apply_event(1000, {"type": "command", "kind": "AdvancePhase"})
    for e in engine.events:
        log.append(e.to_dict())
    path = log.path
    digest_before = hashlib.sha256(path.read_bytes()).hexdigest()
    store.write_record(engine)
    store.records()
    render_report(store.records())
    assert hashlib.sha256(path.read_bytes()).hexdigest() == digest_before
    log.close()


# -- records + replay consistency ------------------------------------------------------

def drive_session(engine):
    adv = {"type": "command", "kind": "AdvancePhase"}
    engine.apply_event(1000, adv)
    engine.apply_event(2000, {"type": "observe", "kind": "HandReach"})
    engine.apply_event(3000, adv)
    engine.apply_event(4000, adv)
    engine.apply_event(5000, {"type": "observe", "kind": "HandHold"})
    engine.apply_event(6000, adv)
    for m in range(3):
        t = 7000 + m * 2000
        engine.apply_event(t, adv)
        engine.apply_event(t + 500, {
            "type": "algorithm", "kind": "GestureMatched", "movement": m,
            "result": {"status": "success"}})


def test_replay_reproduces_outcomes(store):
    engine, log = store.open_session("F")
    drive_session(engine)
    for e in engine.events:
        log.append(e.to_dict())
    log.close()
    stored = store.write_record(engine)
    replayed = store.replay_session(stored.session_id)
    assert replayed.to_dict() == stored.to_dict()


def test_replay_with_expiry_ticks(store):
    engine, log = store.open_session("G")
    engine.apply_event(1000, {"type": "command", "kind": "AdvancePhase"})
    engine.tick(31001)  # greetings expires -> 1
    engine.apply_event(32000, {"type": "command", "kind": "AdvancePhase"})
    engine.tick(70000)  # pairing expires -> 1
    engine.apply_event(71000, {"type": "command", "kind": "Abort"})
    for e in engine.events:
        log.append(e.to_dict())
    log.close()
    stored = store.write_record(engine)
    assert stored.status == "aborted"
    replayed = store.replay_session(stored.session_id)
    assert replayed.to_dict() == stored.to_dict()


# -- reports -----------------------------------------------------------------------

def test_report_shape_and_purity(store):
    for pid in ("F", "I"):
        engine, log = store.open_session(pid)
        drive_session(engine)
        for e in engine.events:
            log.append(e.to_dict())
        log.close()
        store.write_record(engine)
    records = store.records()
    rows = report_rows(records)
    assert [r["participant"] for r in rows] == ["F", "I"]
    assert rows[0]["greetings"] == "3"
    assert rows[0]["imitation"] == "3a"
    text1 = render_report(records)
    text2 = render_report(store.records())
    assert text1 == text2
    assert "F" in text1 and "|" in text1
    parsed = json.loads(report_json(records))
    assert parsed[0]["pairing"] == "3"


def test_aborted_session_partial_row(store):
    engine, log = store.open_session("H")
    engine.apply_event(1000, {"type": "command", "kind": "AdvancePhase"})
    engine.apply_event(2000, {"type": "observe", "kind": "Smile"})
    engine.apply_event(3000, {"type": "command", "kind": "AdvancePhase"})
    engine.apply_event(4000, {"type": "command", "kind": "Abort"})
    for e in engine.events:
        log.append(e.to_dict())
    log.close()
    store.write_record(engine)
    row = report_rows(store.records())[0]
    assert row["status"] == "aborted"
    assert row["greetings"] == "2"
    assert row["pairing"] == ""
    assert row["imitation"] == ""
