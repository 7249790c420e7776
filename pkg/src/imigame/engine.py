"""Phased interaction session state machine and scoring rubric.

Phases run greetings -> pairing -> imitation (three movements) ->
closing. Each scoring window arms when the operator signals the prompt
was delivered (AdvancePhase), waits the configured interval, and scores
from the fused operator + algorithm evidence; a second AdvancePhase
closes a window early. A failed (1a) movement switches that movement to
mirroring mode, where the system imitates the participant and the
operator reports the reaction (3b/2b/1b); mirroring windows arm
themselves because the system itself is the prompt.

The engine is a deterministic event-sourced machine: feeding the same
timestamped event log through apply_event/tick always reproduces the
same outputs. It never reads wall-clock time; ticks carry the clock.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import IllegalTransition

PHASE_GREETINGS = "greetings"
PHASE_PAIRING = "pairing"
PHASE_IMITATION = "imitation"
PHASE_CLOSING = "closing"
PHASE_ABORTED = "aborted"

MODE_DEMONSTRATE = "demonstrate"
MODE_MIRRORING = "mirroring"

N_MOVEMENTS = 3

OBSERVATION_KINDS = frozenset({
    "HandReach", "HandHold", "Smile", "HeadTowards", "JointAttention",
    "ImitationAttempt", "PositiveReaction", "IncreasedAttention",
})
COMMAND_KINDS = frozenset({
    "AdvancePhase", "UseObjects", "StartMirroring", "ReDemonstrate",
    "AssignRole", "Abort",
})
ALGORITHM_KINDS = frozenset({
    "GestureMatched", "GestureFailed", "ActivityChange",
})

# Observation kinds that may legally be entered per phase/mode (the
# console mirrors this table for its buttons).
LEGAL_OBSERVATIONS = {
    PHASE_GREETINGS: ("HandReach", "Smile", "HeadTowards"),
    PHASE_PAIRING: ("HandHold", "Smile", "HeadTowards"),
    (PHASE_IMITATION, MODE_DEMONSTRATE): ("ImitationAttempt", "JointAttention"),
    (PHASE_IMITATION, MODE_MIRRORING): ("PositiveReaction", "IncreasedAttention"),
}


@dataclass(frozen=True)
class RubricConfig:
    wait_window_ms: int = 30000       # greetings/pairing/mirroring windows
    movement_window_ms: int = 20000   # per-movement demonstrate window
    auto_arm_after_ms: int = 300000   # arm by itself if the operator never does
    # cue -> code mapping toggles: which observations count as "signs of
    # interest" (code 2) in greetings/pairing, and which count for the
    # mirroring codes 3b/2b
    interest_cues: tuple = ("Smile", "HeadTowards")
    mirroring_positive_cues: tuple = ("PositiveReaction",)
    mirroring_attention_cues: tuple = ("IncreasedAttention",)

    def __post_init__(self):
        if self.wait_window_ms <= 0:
            raise ValueError("wait_window_ms must be > 0")
        object.__setattr__(self, "interest_cues",
                           tuple(self.interest_cues))
        object.__setattr__(self, "mirroring_positive_cues",
                           tuple(self.mirroring_positive_cues))
        object.__setattr__(self, "mirroring_attention_cues",
                           tuple(self.mirroring_attention_cues))


@dataclass(frozen=True)
class SessionEvent:
    """One log entry: an observation, algorithm detection, or command,
    stamped by the engine with its sequence number and phase."""
    t_ms: int
    payload: dict
    seq: int = -1
    phase: str = ""

    def kind(self) -> str:
        return self.payload.get("kind", "")

    def etype(self) -> str:
        return self.payload.get("type", "")

    def to_dict(self) -> dict:
        return {"seq": self.seq, "t_ms": self.t_ms, "phase": self.phase,
                "payload": self.payload}

    @classmethod
    def from_dict(cls, d: dict) -> "SessionEvent":
        return cls(t_ms=d["t_ms"], payload=d["payload"], seq=d["seq"],
                   phase=d["phase"])


@dataclass(frozen=True)
class PhaseOutcome:
    phase: str                      # greetings | pairing | imitation
    code: str                       # 3/2/1, 3a/2a/1a, 3b/2b/1b
    t_ms: int
    movement: Optional[int] = None
    mode: Optional[str] = None
    with_objects: bool = False
    evidence: tuple = ()

    def to_dict(self) -> dict:
        return {"phase": self.phase, "code": self.code, "t_ms": self.t_ms,
                "movement": self.movement, "mode": self.mode,
                "with_objects": self.with_objects,
                "evidence": list(self.evidence)}

    @classmethod
    def from_dict(cls, d: dict) -> "PhaseOutcome":
        return cls(phase=d["phase"], code=d["code"], t_ms=d["t_ms"],
                   movement=d.get("movement"), mode=d.get("mode"),
                   with_objects=d.get("with_objects", False),
                   evidence=tuple(d.get("evidence", ())))


def _kinds(events) -> set:
    return {e.kind() for e in events if e.etype() == "observe"}


def _evidence(events, kinds) -> tuple:
    return tuple(e.seq for e in events
                 if e.etype() == "observe" and e.kind() in kinds)


def score_greetings(events, config: RubricConfig = RubricConfig()) -> tuple:
    """(code, evidence): reached out -> 3; interest signs -> 2; else 1.
    Timing inside the window is deliberately irrelevant."""
    kinds = _kinds(events)
    interest = set(config.interest_cues)
    if "HandReach" in kinds:
        return "3", _evidence(events, {"HandReach"})
    if kinds & interest:
        return "2", _evidence(events, interest)
    return "1", ()


def score_pairing(events, config: RubricConfig = RubricConfig()) -> tuple:
    """(code, evidence): held the offered hand -> 3; interest -> 2; else 1."""
    kinds = _kinds(events)
    interest = set(config.interest_cues)
    if "HandHold" in kinds:
        return "3", _evidence(events, {"HandHold"})
    if kinds & interest:
        return "2", _evidence(events, interest)
    return "1", ()


def score_imitation_movement(events, match_status: str) -> tuple:
    """(code, evidence) for one movement's demonstrate window.

    success -> 3a; an attempt (operator-observed or an algorithm
    attempt_failed) without success -> 2a; otherwise 1a (the engine then
    switches the movement to mirroring).
    """
    attempt_seqs = _evidence(events, {"ImitationAttempt"})
    alg_seqs = tuple(e.seq for e in events if e.etype() == "algorithm"
                     and e.kind() in ("GestureMatched", "GestureFailed"))
    if match_status == "success":
        return "3a", attempt_seqs + alg_seqs
    if attempt_seqs or match_status == "attempt_failed":
        return "2a", attempt_seqs + alg_seqs
    return "1a", ()


def score_mirroring(events, config: RubricConfig = RubricConfig()) -> tuple:
    """(code, evidence): operator-confirmed positive reaction -> 3b;
    increased attention -> 2b; else 1b. ActivityChange suggestions never
    score by themselves."""
    kinds = _kinds(events)
    positive = set(config.mirroring_positive_cues)
    attention = set(config.mirroring_attention_cues)
    if kinds & positive:
        return "3b", _evidence(events, positive)
    if kinds & attention:
        return "2b", _evidence(events, attention)
    return "1b", ()


def aggregate_imitation(outcomes) -> tuple:
    """Session-level imitation code: best achieved per the ordering
    3a = 3b > 2a = 2b > 1a = 1b, ties toward the 'a' family. Returns
    (code, with_objects)."""
    imit = [o for o in outcomes if o.phase == PHASE_IMITATION]
    if not imit:
        raise ValueError("no imitation outcomes to aggregate")
    best = max(imit, key=lambda o: (int(o.code[0]), o.code[1] == "a"))
    return best.code, any(o.with_objects for o in imit)


class SessionEngine:
    """Single-writer state machine; see module docstring.

    apply_event/tick return a list of output dicts (phase changes,
    armed windows, outcomes, directives for the processing pipeline,
    warnings). Raises IllegalTransition for commands that are not legal
    in the current phase; illegal events are not logged, so a stored
    log replays cleanly.
    """

    def __init__(self, session_id: str, participant_id: str,
                 config: RubricConfig = RubricConfig()):
        self.session_id = session_id
        self.participant_id = participant_id
        self.config = config
        self.phase = PHASE_GREETINGS
        self.movement = 0
        self.mode = MODE_DEMONSTRATE
        self.with_objects = False
        self.status = "running"
        self.clock_ms = 0
        self.window_deadline: Optional[int] = None
        self.context_opened_ms = 0
        self.events: list = []
        self.window_events: list = []
        self.outcomes: list = []
        self.warnings: list = []
        self.last_match: Optional[dict] = None
        self._seq = 0

    # -- helpers ---------------------------------------------------------

    def phase_label(self) -> str:
        if self.phase == PHASE_IMITATION:
            return f"imitation.{self.movement}.{self.mode}"
        return self.phase

    def window_ms_for_context(self) -> int:
        if self.phase == PHASE_IMITATION and self.mode == MODE_DEMONSTRATE:
            return self.config.movement_window_ms
        return self.config.wait_window_ms

    def _out_state(self) -> dict:
        return {
            "type": "state",
            "phase": self.phase,
            "movement": self.movement if self.phase == PHASE_IMITATION else None,
            "mode": self.mode if self.phase == PHASE_IMITATION else None,
            "with_objects": self.with_objects,
            "window_deadline_ms": self.window_deadline,
            "status": self.status,
            "t_ms": self.clock_ms,
        }

    def _warn(self, message: str, outputs: list) -> None:
        self.warnings.append({"t_ms": self.clock_ms, "message": message})
        outputs.append({"type": "warning", "message": message,
                        "t_ms": self.clock_ms})

    def _arm(self, outputs: list) -> None:
        self.window_deadline = self.clock_ms + self.window_ms_for_context()
        outputs.append({"type": "window_armed", "phase": self.phase_label(),
                        "deadline_ms": self.window_deadline,
                        "t_ms": self.clock_ms})
        if self.phase == PHASE_IMITATION and self.mode == MODE_DEMONSTRATE:
            # demonstration delivered: the matcher watches from here on
            outputs.append({"type": "directive", "kind": "ArmMatcher",
                            "movement": self.movement, "t_ms": self.clock_ms})
        outputs.append(self._out_state())

    # -- public API ------------------------------------------------------

    def tick(self, t_ms: int) -> list:
        """Advance the monotonic clock; fire window expiry / auto-arm.

        Ticks that act (close a window or auto-arm) are logged as
        synthetic {"type": "tick"} entries so that replaying the log
        reproduces expiry-driven outcomes at identical times; idle ticks
        stay out of the log.
        """
        outputs: list = []
        if t_ms > self.clock_ms:
            self.clock_ms = t_ms
        if self.status != "running":
            return outputs
        if self.window_deadline is not None:
            if self.clock_ms >= self.window_deadline:
                self._log(SessionEvent(t_ms=self.clock_ms,
                                       payload={"type": "tick"},
                                       seq=self._seq,
                                       phase=self.phase_label()))
                self._close_window(outputs)
        elif (self.clock_ms - self.context_opened_ms
              >= self.config.auto_arm_after_ms):
            self._log(SessionEvent(t_ms=self.clock_ms,
                                   payload={"type": "tick"},
                                   seq=self._seq,
                                   phase=self.phase_label()))
            self._warn("window auto-armed after operator inactivity", outputs)
            self._arm(outputs)
        return outputs

    def apply_event(self, t_ms: int, payload: dict) -> list:
        """Stamp, log, and apply one event; returns emitted outputs."""
        if self.status != "running":
            raise IllegalTransition(
                f"session is {self.status}; no further events accepted")
        outputs = self.tick(t_ms)
        if self.status != "running":
            # the tick just expired the final window and closed the session
            raise IllegalTransition(
                f"session is {self.status}; no further events accepted")
        event = SessionEvent(t_ms=max(t_ms, self.clock_ms), payload=payload,
                             seq=self._seq, phase=self.phase_label())
        etype = event.etype()
        if etype == "command":
            outputs += self._apply_command(event)
        elif etype == "observe":
            self._log(event)
            self.window_events.append(event)
        elif etype == "algorithm":
            self._log(event)
            outputs += self._apply_algorithm(event)
        elif etype == "warning":
            self._log(event)
            self._warn(event.payload.get("message", ""), outputs)
        else:
            raise ValueError(f"unknown event type: {etype!r}")
        return outputs

    # -- internals -------------------------------------------------------

    def _log(self, event: SessionEvent) -> None:
        self.events.append(event)
        self._seq += 1

    def _apply_algorithm(self, event: SessionEvent) -> list:
        outputs: list = []
        kind = event.kind()
        if kind == "ActivityChange":
            self.window_events.append(event)
            outputs.append({"type": "suggestion", "t_ms": event.t_ms,
                            "kind": "ActivityChange",
                            "stats": event.payload.get("stats", {})})
            return outputs
        if self.phase != PHASE_IMITATION or self.mode != MODE_DEMONSTRATE:
            self._warn(f"{kind} ignored outside a demonstrate window", outputs)
            return outputs
        if event.payload.get("movement") != self.movement:
            self._warn(f"{kind} for stale movement ignored", outputs)
            return outputs
        self.window_events.append(event)
        self.last_match = event.payload.get("result", {})
        if kind == "GestureMatched" and self.last_match.get("status") == "success":
            self._close_window(outputs)
        return outputs

    def _apply_command(self, event: SessionEvent) -> list:
        outputs: list = []
        kind = event.kind()
        if kind == "Abort":
            self._log(event)
            self.status = "aborted"
            self.phase = PHASE_ABORTED
            self.window_deadline = None
            outputs.append(self._out_state())
            return outputs
        if kind == "AssignRole":
            self._log(event)
            outputs.append({"type": "directive", "kind": "AssignRole",
                            "track": event.payload.get("track"),
                            "t_ms": event.t_ms})
            return outputs
        if kind == "AdvancePhase":
            if self.phase == PHASE_CLOSING:
                raise IllegalTransition("session already closing")
            self._log(event)
            self.window_events.append(event)
            if self.window_deadline is None:
                self._arm(outputs)
            else:
                self._close_window(outputs)
            return outputs
        if kind == "UseObjects":
            if self.phase != PHASE_IMITATION:
                raise IllegalTransition("UseObjects is only legal during imitation")
            self._log(event)
            self.with_objects = True
            outputs.append(self._out_state())
            return outputs
        if kind == "StartMirroring":
            if self.phase != PHASE_IMITATION:
                raise IllegalTransition(
                    f"StartMirroring during {self.phase} is not legal")
            if self.mode == MODE_MIRRORING:
                raise IllegalTransition("already mirroring")
            self._log(event)
            self._close_window(outputs, force_mirroring=True)
            return outputs
        if kind == "ReDemonstrate":
            if self.phase != PHASE_IMITATION or self.mode != MODE_DEMONSTRATE:
                raise IllegalTransition(
                    "ReDemonstrate is only legal in a demonstrate window")
            self._log(event)
            self.window_events.append(event)
            self.last_match = None
            self._arm(outputs)
            return outputs
        raise ValueError(f"unknown command kind: {kind!r}")

    def _open_context(self, outputs: list) -> None:
        self.window_deadline = None
        self.window_events = []
        self.last_match = None
        self.context_opened_ms = self.clock_ms
        outputs.append({"type": "phase", "phase": self.phase_label(),
                        "t_ms": self.clock_ms})
        outputs.append(self._out_state())
        if self.phase == PHASE_IMITATION and self.mode == MODE_MIRRORING:
            # mirroring is system-initiated: its window arms immediately
            outputs.append({"type": "directive", "kind": "StartMirrorStream",
                            "movement": self.movement, "t_ms": self.clock_ms})
            self._arm(outputs)

    def _emit_outcome(self, outcome: PhaseOutcome, outputs: list) -> None:
        self.outcomes.append(outcome)
        outputs.append({"type": "outcome", **outcome.to_dict()})

    def _close_window(self, outputs: list, force_mirroring: bool = False) -> None:
        t = self.clock_ms
        if self.phase == PHASE_GREETINGS:
            code, ev = score_greetings(self.window_events, self.config)
            self._emit_outcome(PhaseOutcome(PHASE_GREETINGS, code, t,
                                            evidence=ev), outputs)
            self.phase = PHASE_PAIRING
            self._open_context(outputs)
        elif self.phase == PHASE_PAIRING:
            code, ev = score_pairing(self.window_events, self.config)
            self._emit_outcome(PhaseOutcome(PHASE_PAIRING, code, t,
                                            evidence=ev), outputs)
            self.phase = PHASE_IMITATION
            self.movement = 0
            self.mode = MODE_DEMONSTRATE
            self._open_context(outputs)
        elif self.phase == PHASE_IMITATION and self.mode == MODE_DEMONSTRATE:
            status = (self.last_match or {}).get("status", "no_attempt")
            code, ev = score_imitation_movement(self.window_events, status)
            self._emit_outcome(
                PhaseOutcome(PHASE_IMITATION, code, t, movement=self.movement,
                             mode=MODE_DEMONSTRATE,
                             with_objects=self.with_objects, evidence=ev),
                outputs)
            outputs.append({"type": "directive", "kind": "StopMatcher",
                            "movement": self.movement, "t_ms": t})
            if code == "1a" or force_mirroring:
                self.mode = MODE_MIRRORING
                self._open_context(outputs)
            else:
                self._next_movement(outputs)
        elif self.phase == PHASE_IMITATION and self.mode == MODE_MIRRORING:
            code, ev = score_mirroring(self.window_events, self.config)
            self._emit_outcome(
                PhaseOutcome(PHASE_IMITATION, code, t, movement=self.movement,
                             mode=MODE_MIRRORING,
                             with_objects=self.with_objects, evidence=ev),
                outputs)
            outputs.append({"type": "directive", "kind": "StopMirrorStream",
                            "movement": self.movement, "t_ms": t})
            self._next_movement(outputs)

    def _next_movement(self, outputs: list) -> None:
        if self.movement + 1 < N_MOVEMENTS:
            self.movement += 1
            self.mode = MODE_DEMONSTRATE
            self._open_context(outputs)
        else:
            self.phase = PHASE_CLOSING
            self.status = "completed"
            self.window_deadline = None
            code, with_objects = aggregate_imitation(self.outcomes)
            outputs.append({"type": "phase", "phase": PHASE_CLOSING,
                            "t_ms": self.clock_ms})
            outputs.append({"type": "aggregate", "code": code,
                            "with_objects": with_objects,
                            "t_ms": self.clock_ms})
            outputs.append(self._out_state())

    # -- results ---------------------------------------------------------

    def aggregate(self) -> Optional[dict]:
        imit = [o for o in self.outcomes if o.phase == PHASE_IMITATION]
        if not imit:
            return None
        code, with_objects = aggregate_imitation(self.outcomes)
        return {"code": code, "with_objects": with_objects,
                "mirroring_triggered": any(o.mode == MODE_MIRRORING
                                           for o in imit)}
