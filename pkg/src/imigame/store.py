"""Participant registry, append-only session logs, and reports.

Everything is plain files under one store directory:

    <root>/participants.json          id -> profile
    <root>/sessions/<sid>.log.ndjson  one JSON event per line
                                      {seq, t_ms, phase, payload}
    <root>/sessions/<sid>.record.json outcomes + metadata, written on close

Logs are append-only and flushed per event; records are derivable from
the logs by replaying the engine, and reports are a pure function of
the stored records.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

from .engine import PhaseOutcome, RubricConfig, SessionEngine
from .errors import DuplicateId, SessionClosed, UnknownParticipant


@dataclass(frozen=True)
class ParticipantProfile:
    id: str
    biological_age: float
    nd_age: float
    cars_score: float
    verbal: bool = True
    notes: str = ""

    def __post_init__(self):
        if self.cars_score <= 0:
            raise ValueError("cars_score must be > 0")
        if self.biological_age <= 0 or self.nd_age <= 0:
            raise ValueError("ages must be > 0")


@dataclass(frozen=True)
class SessionRecord:
    session_id: str
    participant_id: str
    started_at_ms: int
    status: str                    # completed | aborted
    outcomes: tuple                # of PhaseOutcome
    aggregate: Optional[dict]
    warnings: tuple
    final_t_ms: int
    rubric: dict                   # RubricConfig used, for faithful replay

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "participant_id": self.participant_id,
            "started_at_ms": self.started_at_ms,
            "status": self.status,
            "outcomes": [o.to_dict() for o in self.outcomes],
            "aggregate": self.aggregate,
            "warnings": list(self.warnings),
            "final_t_ms": self.final_t_ms,
            "rubric": self.rubric,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SessionRecord":
        return cls(
            session_id=d["session_id"],
            participant_id=d["participant_id"],
            started_at_ms=d["started_at_ms"],
            status=d["status"],
            outcomes=tuple(PhaseOutcome.from_dict(o) for o in d["outcomes"]),
            aggregate=d.get("aggregate"),
            warnings=tuple(d.get("warnings", ())),
            final_t_ms=d["final_t_ms"],
            rubric=d.get("rubric", {}),
        )

    def phase_code(self, phase: str) -> str:
        for o in self.outcomes:
            if o.phase == phase:
                return o.code
        return ""


class SessionLog:
    """Append-only writer for one session's event log."""

    def __init__(self, path: Path):
        self.path = path
        self._fh = open(path, "a", encoding="utf-8")
        self.closed = False

    def append(self, entry: dict) -> None:
        if self.closed:
            raise SessionClosed(f"log {self.path.name} is closed")
        self._fh.write(json.dumps(entry) + "\n")
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def close(self) -> None:
        if not self.closed:
            self._fh.close()
            self.closed = True


class SessionStore:
    """File-backed registry and session persistence."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "sessions").mkdir(exist_ok=True)
        self._participants_path = self.root / "participants.json"

    # -- participants ------------------------------------------------------

    def _load_participants(self) -> dict:
        if not self._participants_path.exists():
            return {}
        return json.loads(self._participants_path.read_text())

    def register_participant(self, profile: ParticipantProfile) -> None:
        people = self._load_participants()
        if profile.id in people:
            raise DuplicateId(profile.id)
        people[profile.id] = asdict(profile)
        self._participants_path.write_text(json.dumps(people, indent=2))

    def get_participant(self, participant_id: str) -> ParticipantProfile:
        people = self._load_participants()
        if participant_id not in people:
            raise UnknownParticipant(participant_id)
        return ParticipantProfile(**people[participant_id])

    def participants(self) -> list:
        return [ParticipantProfile(**p)
                for p in self._load_participants().values()]

    # -- sessions ----------------------------------------------------------

    def new_session_id(self, participant_id: str) -> str:
        existing = list((self.root / "sessions").glob(
            f"{participant_id}-*.log.ndjson"))
        return f"{participant_id}-{len(existing) + 1:04d}"

    def open_session(self, participant_id: str,
                     config: RubricConfig = RubricConfig()):
        """Registry-checked session start: a fresh engine plus its log."""
        self.get_participant(participant_id)  # raises UnknownParticipant
        session_id = self.new_session_id(participant_id)
        log = SessionLog(self.root / "sessions" / f"{session_id}.log.ndjson")
        engine = SessionEngine(session_id, participant_id, config)
        return engine, log

    def write_record(self, engine: SessionEngine, started_at_ms: int = 0) -> SessionRecord:
        record = SessionRecord(
            session_id=engine.session_id,
            participant_id=engine.participant_id,
            started_at_ms=started_at_ms,
            status=engine.status if engine.status != "running" else "aborted",
            outcomes=tuple(engine.outcomes),
            aggregate=engine.aggregate(),
            warnings=tuple(w["message"] for w in engine.warnings),
            final_t_ms=engine.clock_ms,
            # JSON round-trip now so the in-memory record equals its
            # persisted form (tuples become lists)
            rubric=json.loads(json.dumps(asdict(engine.config))),
        )
        path = self.root / "sessions" / f"{engine.session_id}.record.json"
        path.write_text(json.dumps(record.to_dict(), indent=2))
        return record

    def load_record(self, session_id: str) -> SessionRecord:
        path = self.root / "sessions" / f"{session_id}.record.json"
        return SessionRecord.from_dict(json.loads(path.read_text()))

    def load_log(self, session_id: str) -> list:
        path = self.root / "sessions" / f"{session_id}.log.ndjson"
        return [json.loads(line) for line in path.read_text().splitlines()
                if line.strip()]

    def records(self) -> list:
        out = []
        for path in sorted((self.root / "sessions").glob("*.record.json")):
            out.append(SessionRecord.from_dict(json.loads(path.read_text())))
        return out

    def replay_session(self, session_id: str) -> SessionRecord:
        """Re-run the engine over a stored log; the result must match the
        stored record (log-replay consistency)."""
        stored = self.load_record(session_id)
        engine = SessionEngine(session_id, stored.participant_id,
                               RubricConfig(**stored.rubric))
        for entry in self.load_log(session_id):
            if entry["payload"].get("type") == "tick":
                engine.tick(entry["t_ms"])
            else:
                engine.apply_event(entry["t_ms"], entry["payload"])
        engine.tick(stored.final_t_ms)
        return SessionRecord(
            session_id=session_id,
            participant_id=stored.participant_id,
            started_at_ms=stored.started_at_ms,
            status=engine.status if engine.status != "running" else "aborted",
            outcomes=tuple(engine.outcomes),
            aggregate=engine.aggregate(),
            warnings=tuple(w["message"] for w in engine.warnings),
            final_t_ms=engine.clock_ms,
            rubric=stored.rubric,
        )


def default_participants() -> list:
    """The four study participants (biological age, developmental age,
    CARS score as recorded in the participant characteristics table)."""
    return [
        ParticipantProfile(id="F", biological_age=18, nd_age=9, cars_score=33),
        ParticipantProfile(id="G", biological_age=14, nd_age=4, cars_score=46),
        ParticipantProfile(id="H", biological_age=13, nd_age=5, cars_score=38),
        ParticipantProfile(id="I", biological_age=12, nd_age=0.5, cars_score=47),
    ]


def ensure_default_participants(store: SessionStore) -> None:
    for profile in default_participants():
        try:
            store.register_participant(profile)
        except DuplicateId:
            pass


# -- reporting --------------------------------------------------------------

REPORT_COLUMNS = ("participant", "greetings", "pairing", "imitation",
                  "comments")


def _comment(record: SessionRecord) -> str:
    if record.status == "aborted":
        return "session aborted"
    agg = record.aggregate or {}
    parts = []
    if agg.get("code", "").endswith("b"):
        parts.append("recognition of being imitated")
    elif agg.get("with_objects"):
        parts.append("imitation with objects")
    else:
        parts.append("imitation without objects")
    if agg.get("mirroring_triggered"):
        parts.append("mirroring triggered")
    dur_s = (record.final_t_ms - record.started_at_ms) / 1000.0
    parts.append(f"duration {dur_s:.0f}s")
    if record.warnings:
        parts.append(f"{len(record.warnings)} warning(s)")
    return ", ".join(parts)


def report_rows(records) -> list:
    """One row dict per session, Table-2 shaped."""
    rows = []
    for r in records:
        agg = r.aggregate or {}
        rows.append({
            "participant": r.participant_id,
            "session": r.session_id,
            "status": r.status,
            "greetings": r.phase_code("greetings"),
            "pairing": r.phase_code("pairing"),
            "imitation": agg.get("code", ""),
            "comments": _comment(r),
        })
    return rows


def render_report(records) -> str:
    """Aligned text table of session results."""
    rows = report_rows(records)
    cols = REPORT_COLUMNS
    table = [[str(row[c]) for c in cols] for row in rows]
    widths = [max(len(c), *(len(t[i]) for t in table)) if table else len(c)
              for i, c in enumerate(cols)]
    lines = [" | ".join(c.ljust(w) for c, w in zip(cols, widths))]
    lines.append("-+-".join("-" * w for w in widths))
    for t in table:
        lines.append(" | ".join(v.ljust(w) for v, w in zip(t, widths)))
    return "\n".join(lines)


def report_json(records) -> str:
    return json.dumps(report_rows(records), indent=2)
