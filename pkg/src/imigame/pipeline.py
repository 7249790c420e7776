"""Headless session runner: frames + operator events -> stored record.

One single-threaded loop merges the frame stream and the operator event
stream in timestamp order, drives scene cleanup, feeds the movement
matcher while a demonstrate window is armed, generates mirror-pose
commands during mirroring, and lets the engine score. Every session
reachable through the live console is also reachable here with a
scenario script, which is what the acceptance suite exercises.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from . import kernels, scene
from .config import AppConfig
from .engine import (
    MODE_DEMONSTRATE, PHASE_IMITATION, SessionEngine,
)
from .errors import AmbiguousRoles, IllegalTransition
from .gestures import (
    FeatureFrame, GestureMatcher, MatchResult, activity_change,
    feature_frames, mirror_pose_command, motion_stats,
)
from .model import AngleFeatures, NormalizedSkeleton
from .store import SessionRecord, SessionStore

MODEL_LOST_AFTER_MS = 1500
SUGGESTION_WINDOW_MS = 2000


@dataclass
class RunHooks:
    """Optional observation points for a live front end."""
    on_frame: Optional[Callable] = None      # (frame, tracks) after cleanup
    on_output: Optional[Callable] = None     # each engine output dict
    on_pose_command: Optional[Callable] = None  # mirror PoseCommand


@dataclass
class RunResult:
    record: SessionRecord
    counters: dict = field(default_factory=dict)


class SessionRunner:
    """Applies the processing loop around one SessionEngine."""

    def __init__(self, engine: SessionEngine, log, config: AppConfig,
                 hooks: Optional[RunHooks] = None):
        self.engine = engine
        self.log = log
        self.config = config
        self.hooks = hooks or RunHooks()
        self.templates = config.gesture_templates()
        self.tracks: list = []
        self.role_policy = scene.RolePolicy(kind=config.role.policy,
                                            model_on=config.role.model_on)
        self.roles_assigned = False
        self.matcher: Optional[GestureMatcher] = None
        self.matcher_movement: Optional[int] = None
        self.mirroring = False
        self._log_cursor = 0
        self._model_seen_ms = 0
        self._model_warned = False
        self._recent: list = []          # FeatureFrames for suggestions
        self._last_stats = None
        self._last_suggest_ms = 0
        self.outputs: list = []

    # -- engine bookkeeping ----------------------------------------------

    def _flush_log(self) -> None:
        while self._log_cursor < len(self.engine.events):
            self.log.append(self.engine.events[self._log_cursor].to_dict())
            self._log_cursor += 1

    def _handle_outputs(self, outputs: list) -> None:
        for out in outputs:
            self.outputs.append(out)
            if out.get("type") == "directive":
                self._apply_directive(out)
            if self.hooks.on_output:
                self.hooks.on_output(out)
        self._flush_log()

    def _apply_directive(self, directive: dict) -> None:
        kind = directive["kind"]
        if kind == "ArmMatcher":
            movement = directive["movement"]
            self.matcher = GestureMatcher(self.templates[movement],
                                          self.config.match)
            self.matcher_movement = movement
        elif kind == "StopMatcher":
            self.matcher = None
            self.matcher_movement = None
        elif kind == "StartMirrorStream":
            self.mirroring = True
            self._recent = []
            self._last_stats = None
        elif kind == "StopMirrorStream":
            self.mirroring = False
        elif kind == "AssignRole":
            self.role_policy = scene.RolePolicy.by_operator(directive["track"])
            try:
                self.tracks = scene.assign_roles(self.tracks, self.role_policy)
                self.roles_assigned = True
            except AmbiguousRoles:
                self.roles_assigned = False

    def apply_event(self, t_ms: int, payload: dict) -> None:
        if (payload.get("type") == "command"
                and payload.get("kind") == "AdvancePhase"
                and self.matcher is not None and self.matcher.n_frames > 0
                and self.engine.phase == PHASE_IMITATION
                and self.engine.mode == MODE_DEMONSTRATE
                and self.engine.window_deadline is not None):
            # operator closes the window early: record the matcher's
            # verdict first so the score reflects the algorithm too
            # (a concluded success would already have been delivered)
            result = self.matcher.finalize()
            movement = self.matcher_movement
            self.matcher = None
            self.apply_event(t_ms - 1, {
                "type": "algorithm", "kind": "GestureFailed",
                "movement": movement, "result": result.to_dict(),
            })
        try:
            outputs = self.engine.apply_event(t_ms, payload)
        except IllegalTransition as exc:
            self.outputs.append({"type": "warning", "t_ms": t_ms,
                                 "message": f"rejected event: {exc}"})
            if self.hooks.on_output:
                self.hooks.on_output(self.outputs[-1])
            return
        self._handle_outputs(outputs)

    def tick(self, t_ms: int) -> None:
        # a demonstrate window about to expire scores against the
        # matcher's conclusion, so deliver that verdict just before
        deadline = self.engine.window_deadline
        if (self.matcher is not None and deadline is not None
                and t_ms >= deadline and self.matcher.n_frames > 0):
            result = self.matcher.finalize()
            self.matcher = None
            self.apply_event(deadline - 1, {
                "type": "algorithm", "kind": "GestureFailed",
                "movement": self.matcher_movement,
                "result": result.to_dict(),
            })
        self._handle_outputs(self.engine.tick(t_ms))

    # -- frame path --------------------------------------------------------

    def _participant_feature_frame(self, t_ms: int) -> Optional[FeatureFrame]:
        tr = scene.get_role(self.tracks, scene.ROLE_PARTICIPANT)
        if tr is None or tr.last_seen_ms != t_ms:
            if not self.roles_assigned:
                return None
            # participant dropped out this frame: an all-invalid sample
            # keeps the matcher's scoreability accounting honest
            return FeatureFrame(
                t_ms=t_ms,
                features=AngleFeatures(np.zeros(kernels.N_FEATURES),
                                       np.zeros(kernels.N_FEATURES, dtype=bool)))
        raw = tr.last_skeleton.data[None, :, :]
        xy, vis, _src, ok = kernels.normalize_batch(raw, self.config.conf_min)
        if not ok[0]:
            return FeatureFrame(
                t_ms=t_ms,
                features=AngleFeatures(np.zeros(kernels.N_FEATURES),
                                       np.zeros(kernels.N_FEATURES, dtype=bool)))
        values, valid = kernels.features_batch(xy, vis)
        return FeatureFrame(t_ms=t_ms,
                            features=AngleFeatures(values[0], valid[0]),
                            xy=xy[0], visible=vis[0])

    def _check_model_visibility(self, t_ms: int) -> None:
        tr = scene.get_role(self.tracks, scene.ROLE_MODEL)
        if tr is not None and tr.last_seen_ms == t_ms:
            report = scene.visibility(tr.last_skeleton, self.config.conf_min)
            if report.coverage >= self.config.filter.min_coverage:
                self._model_seen_ms = t_ms
                self._model_warned = False
                return
        if (self.roles_assigned and not self._model_warned
                and t_ms - self._model_seen_ms > MODEL_LOST_AFTER_MS):
            self._model_warned = True
            self.apply_event(t_ms, {"type": "warning",
                                    "message": "model barely detected"})

    def _suggestions(self, ff: FeatureFrame) -> None:
        self._recent.append(ff)
        cutoff = ff.t_ms - SUGGESTION_WINDOW_MS
        while self._recent and self._recent[0].t_ms < cutoff:
            self._recent.pop(0)
        if (len(self._recent) < 2
                or ff.t_ms - self._last_suggest_ms < SUGGESTION_WINDOW_MS):
            return
        stats = motion_stats(self._recent, SUGGESTION_WINDOW_MS)
        self._last_suggest_ms = ff.t_ms
        if self._last_stats is not None and activity_change(
                self._last_stats, stats, self.config.match.rhythm_change_ratio):
            self.apply_event(ff.t_ms, {
                "type": "algorithm", "kind": "ActivityChange",
                "stats": {"energy": stats.energy,
                          "rhythm_period_ms": stats.rhythm_period_ms},
            })
        self._last_stats = stats

    def process_frame(self, frame) -> None:
        self.tick(frame.timestamp_ms)
        if self.engine.status != "running":
            return
        cleaned = scene.reject_false_positives(
            frame, self.config.filter.min_height_ratio,
            self.config.filter.min_coverage, self.config.conf_min)
        self.tracks = scene.track(self.tracks, cleaned,
                                  self.config.tracking.max_jump,
                                  self.config.tracking.track_ttl_ms,
                                  self.config.conf_min)
        if not self.roles_assigned and self.role_policy.kind == "by_side":
            try:
                self.tracks = scene.assign_roles(self.tracks, self.role_policy)
                self.roles_assigned = any(
                    t.role != scene.ROLE_UNASSIGNED for t in self.tracks)
            except AmbiguousRoles:
                pass
        self._check_model_visibility(frame.timestamp_ms)

        ff = self._participant_feature_frame(frame.timestamp_ms)
        if ff is not None:
            if self.matcher is not None:
                self.matcher.push(ff)
                if self.matcher.concluded:
                    result = self.matcher.finalize()
                    movement = self.matcher_movement
                    self.matcher = None
                    self.apply_event(ff.t_ms, {
                        "type": "algorithm", "kind": "GestureMatched",
                        "movement": movement, "result": result.to_dict(),
                    })
            if self.mirroring:
                self._suggestions(ff)
                if ff.xy is not None and self.hooks.on_pose_command:
                    ns = NormalizedSkeleton(ff.xy.copy(), ff.visible.copy(),
                                            "hips")
                    self.hooks.on_pose_command(
                        mirror_pose_command(ns, ff.t_ms))
        if self.hooks.on_frame:
            self.hooks.on_frame(frame, self.tracks)


def run_session(frames: Iterable, events: list, config: AppConfig,
                store: SessionStore, participant_id: str,
                hooks: Optional[RunHooks] = None) -> RunResult:
    """Drive a full session from a frame stream plus scripted events.

    Frames and events merge in timestamp order. When the stream ends
    with the session still running, the session is aborted and a
    partial record stored.
    """
    engine, log = store.open_session(participant_id, config.rubric)
    runner = SessionRunner(engine, log, config, hooks)
    pending = sorted(events, key=lambda ev: ev[0])
    idx = 0
    last_t = 0
    for frame in frames:
        while (idx < len(pending) and pending[idx][0] <= frame.timestamp_ms
               and engine.status == "running"):
            t, payload = pending[idx]
            runner.tick(t)
            if engine.status == "running":
                runner.apply_event(t, payload)
            idx += 1
        if engine.status != "running":
            break
        runner.process_frame(frame)
        last_t = max(last_t, frame.timestamp_ms)
    while idx < len(pending) and engine.status == "running":
        t, payload = pending[idx]
        runner.tick(t)
        if engine.status == "running":
            runner.apply_event(t, payload)
        last_t = max(last_t, t)
        idx += 1
    if engine.status == "running":
        runner.tick(last_t)
    if engine.status == "running":
        runner.apply_event(last_t, {"type": "command", "kind": "Abort"})
    record = store.write_record(engine)
    log.close()
    return RunResult(record=record,
                     counters={"outputs": len(runner.outputs)})
