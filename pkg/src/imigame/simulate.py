"""Synthetic participant simulator for desk-scale session runs.

Generates kinematically plausible keypoint streams by interpolating
between analytic keyframe poses of the built-in gesture templates, with
optional Gaussian coordinate jitter, plus the scripted operator
observations and commands of a scenario. Deterministic for a given
(script, seed).

Scenario files are JSON:

    {
      "participant": "F",
      "fps": 15,
      "seed": 1,
      "duration_ms": 60000,
      "model_side": "left",
      "timeline": [
        {"at_ms": 500,  "action": "command", "kind": "AdvancePhase"},
        {"at_ms": 3000, "action": "observe", "kind": "HandReach"},
        {"at_ms": 9000, "action": "perform",
         "gesture": "raise_arms_sky", "chirality": "direct",
         "sigma": 0.02, "speed": 1.0},
        {"at_ms": 0, "action": "hide", "limbs": ["l_leg", "r_leg"]},
        {"at_ms": 0, "action": "false_positive",
         "height_ratio": 0.075, "until_ms": 5000}
      ]
    }

Pose-affecting actions: idle (default), perform, perform_partial
(first keyframe only, then back), fidget (continuous non-matching arm
motion). Scene actions: hide (set limb confidences to zero from then
on; empty list unhides), false_positive (miniature wall skeleton),
model (toggle the assistant's skeleton). observe/command entries become
timestamped session events instead of frames.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import UnknownGesture
from .kernels import JOINT_NAMES, MIRROR_MAP, N_JOINTS
from .model import Frame, Skeleton
from .scene import LIMB_JOINTS

CONF_VISIBLE = 0.9

# Stage layout in pixels: torso scale and neck anchor per person.
TORSO_PX = 200.0
PARTICIPANT_NECK = (760.0, 300.0)
MODEL_NECK_LEFT = (360.0, 300.0)
MODEL_NECK_RIGHT = (1160.0, 300.0)
FALSE_POSITIVE_CORNER = (110.0, 90.0)

_J = {name: i for i, name in enumerate(JOINT_NAMES)}


def _base_pose() -> dict:
    """Standing front-view pose, neck at origin, torso length 1, y down."""
    return {
        "nose": (0.0, -0.25), "neck": (0.0, 0.0),
        "r_shoulder": (-0.25, 0.0), "l_shoulder": (0.25, 0.0),
        "r_hip": (-0.15, 1.0), "l_hip": (0.15, 1.0),
        "r_knee": (-0.16, 1.5), "l_knee": (0.16, 1.5),
        "r_ankle": (-0.17, 2.0), "l_ankle": (0.17, 2.0),
        "r_eye": (-0.05, -0.30), "l_eye": (0.05, -0.30),
        "r_ear": (-0.10, -0.28), "l_ear": (0.10, -0.28),
        "r_elbow": (-0.25, 0.30), "r_wrist": (-0.25, 0.60),
        "l_elbow": (0.25, 0.30), "l_wrist": (0.25, 0.60),
    }


def _with_arms(r_elbow, r_wrist, l_elbow, l_wrist) -> dict:
    pose = _base_pose()
    pose.update(r_elbow=r_elbow, r_wrist=r_wrist,
                l_elbow=l_elbow, l_wrist=l_wrist)
    return pose


def _lean(pose: dict, theta: float, arms: str) -> dict:
    """Bend stylized as an image-plane lean: upper body rotated by theta
    about the mid-hip; legs stay. arms: "follow" keeps them rigid with
    the torso, "dangle" hangs them straight down from the shoulders."""
    pivot = np.array([0.0, 1.0])
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    upper = ("nose", "neck", "r_eye", "l_eye", "r_ear", "l_ear",
             "r_shoulder", "l_shoulder",
             "r_elbow", "r_wrist", "l_elbow", "l_wrist")
    out = dict(pose)
    for name in upper:
        p = np.array(pose[name])
        q = pivot + rot @ (p - pivot)
        out[name] = (float(q[0]), float(q[1]))
    if arms == "dangle":
        for side in ("r", "l"):
            sx, sy = out[f"{side}_shoulder"]
            out[f"{side}_elbow"] = (sx, sy + 0.30)
            out[f"{side}_wrist"] = (sx, sy + 0.60)
    return out


def analytic_poses() -> dict:
    """Named poses shared by the simulator and the template definitions.

    The bend poses lean by the template's torso-incline targets (the
    front-view depth of a real bend is invisible in 2D, so the simulator
    stylizes it in the image plane)."""
    neutral = _base_pose()
    overhead = _with_arms((-0.25, -0.30), (-0.25, -0.60),
                          (0.25, -0.30), (0.25, -0.60))
    tpose = _with_arms((-0.55, 0.0), (-0.85, 0.0), (0.55, 0.0), (0.85, 0.0))
    forward = _with_arms((-0.27, 0.06), (-0.29, 0.10),
                         (0.27, 0.06), (0.29, 0.10))
    side_bend = _lean(tpose, 1.05, arms="follow")
    toe_bend = _lean(neutral, 1.30, arms="dangle")
    return {"neutral": neutral, "overhead": overhead, "tpose": tpose,
            "forward": forward, "side_bend": side_bend, "toe_bend": toe_bend}


# Keyframe pose names per gesture, in template order.
GESTURE_POSES = {
    "raise_arms_sky": ("overhead",),
    "arms_side_bend_forward": ("tpose", "side_bend"),
    "arms_forward_bend_toes": ("forward", "toe_bend"),
}

TRANSITION_MS = 600
KEYFRAME_HOLD_MS = 900


def pose_to_array(pose: dict, hidden_joints=frozenset()) -> np.ndarray:
    arr = np.zeros((N_JOINTS, 3))
    for name, j in _J.items():
        arr[j, 0], arr[j, 1] = pose[name]
        arr[j, 2] = 0.0 if j in hidden_joints else CONF_VISIBLE
    return arr


def mirror_pose(pose: dict) -> dict:
    """Chirality-swap a body-frame pose (x negated, sides relabeled)."""
    out = {}
    for name, j in _J.items():
        src = JOINT_NAMES[MIRROR_MAP[j]]
        x, y = pose[src]
        out[name] = (-x, y)
    return out


def _interp(a: dict, b: dict, alpha: float) -> dict:
    return {name: (a[name][0] + (b[name][0] - a[name][0]) * alpha,
                   a[name][1] + (b[name][1] - a[name][1]) * alpha)
            for name in a}


@dataclass(frozen=True)
class ScriptEntry:
    at_ms: int
    action: str
    params: dict = field(default_factory=dict)


@dataclass
class ScenarioScript:
    """Participant behavior timeline plus scene annotations."""
    participant: str
    fps: float = 15.0
    seed: int = 0
    duration_ms: int = 60000
    model_side: str = "left"
    timeline: list = field(default_factory=list)

    def __post_init__(self):
        self.timeline = sorted(self.timeline, key=lambda e: e.at_ms)

    @classmethod
    def from_dict(cls, doc: dict) -> "ScenarioScript":
        entries = []
        for raw in doc.get("timeline", []):
            raw = dict(raw)
            at_ms = int(raw.pop("at_ms"))
            action = raw.pop("action")
            entries.append(ScriptEntry(at_ms=at_ms, action=action, params=raw))
        return cls(
            participant=doc["participant"],
            fps=float(doc.get("fps", 15.0)),
            seed=int(doc.get("seed", 0)),
            duration_ms=int(doc.get("duration_ms", 60000)),
            model_side=doc.get("model_side", "left"),
            timeline=entries,
        )

    @classmethod
    def load(cls, path) -> "ScenarioScript":
        return cls.from_dict(json.loads(Path(path).read_text()))


class _PoseTimeline:
    """Maps session time to the participant's body-frame pose."""

    def __init__(self, entries):
        self.poses = analytic_poses()
        self.segments = []  # (start_ms, end_ms, kind, data)
        for e in entries:
            if e.action in ("perform", "perform_partial"):
                self._add_perform(e)
            elif e.action == "fidget":
                self._add_fidget(e)

    def _gesture_sequence(self, name: str, partial: bool):
        if name not in GESTURE_POSES:
            raise UnknownGesture(name)
        names = GESTURE_POSES[name]
        return names[:1] if partial else names

    def _add_perform(self, e: ScriptEntry):
        gesture = e.params.get("gesture", "")
        chirality = e.params.get("chirality", "direct")
        sigma = float(e.params.get("sigma", 0.0))
        speed = float(e.params.get("speed", 1.0))
        seq = self._gesture_sequence(gesture, e.action == "perform_partial")

        trans = int(TRANSITION_MS / speed)
        hold = int(KEYFRAME_HOLD_MS / speed)
        t = e.at_ms
        prev = self.poses["neutral"]
        for pose_name in seq:
            target = self.poses[pose_name]
            if chirality == "mirrored":
                target = mirror_pose(target)
            self.segments.append((t, t + trans, "interp", (prev, target, sigma)))
            t += trans
            self.segments.append((t, t + hold, "hold", (target, sigma)))
            t += hold
            prev = target
        neutral = self.poses["neutral"]
        self.segments.append((t, t + trans, "interp", (prev, neutral, sigma)))

    def _add_fidget(self, e: ScriptEntry):
        amplitude = float(e.params.get("amplitude", 0.25))
        period_ms = int(e.params.get("period_ms", 700))
        until = int(e.params.get("until_ms", e.at_ms + 5000))
        sigma = float(e.params.get("sigma", 0.0))
        self.segments.append((e.at_ms, until, "fidget",
                              (amplitude, period_ms, sigma)))

    def pose_at(self, t_ms: int):
        """(pose dict, sigma) for the participant at time t."""
        for start, end, kind, data in self.segments:
            if not (start <= t_ms < end):
                continue
            if kind == "interp":
                a, b, sigma = data
                alpha = (t_ms - start) / max(end - start, 1)
                return _interp(a, b, alpha), sigma
            if kind == "hold":
                pose, sigma = data
                return pose, sigma
            if kind == "fidget":
                amplitude, period_ms, sigma = data
                phase = 2.0 * math.pi * (t_ms - start) / period_ms
                wob = amplitude * math.sin(phase)
                pose = dict(self.poses["neutral"])
                for side, sign in (("r", -1.0), ("l", 1.0)):
                    ex, ey = pose[f"{side}_elbow"]
                    wx, wy = pose[f"{side}_wrist"]
                    pose[f"{side}_elbow"] = (ex + sign * wob * 0.5, ey - wob * 0.5)
                    pose[f"{side}_wrist"] = (wx + sign * wob, wy - wob)
                return pose, sigma
        return self.poses["neutral"], 0.0


def simulate(script: ScenarioScript, fps: Optional[float] = None,
             seed: Optional[int] = None):
    """Run a scenario: returns (frames, events).

    frames: list of Frame at the scripted rate, participant plus (by
    default) the model skeleton and any scripted false positives.
    events: list of (t_ms, payload) session events from observe/command
    entries, in time order.
    """
    fps = fps if fps is not None else script.fps
    seed = seed if seed is not None else script.seed
    rng = np.random.default_rng(seed)

    timeline = _PoseTimeline(script.timeline)

    events = []
    hide_changes = []       # (at_ms, frozenset of joints)
    fp_spans = []           # (at_ms, until_ms, height_ratio)
    model_changes = []      # (at_ms, present)
    for e in script.timeline:
        if e.action == "observe":
            events.append((e.at_ms, {"type": "observe", "kind": e.params["kind"]}))
        elif e.action == "command":
            payload = {"type": "command", "kind": e.params["kind"]}
            for k, v in e.params.items():
                if k != "kind":
                    payload[k] = v
            events.append((e.at_ms, payload))
        elif e.action == "hide":
            joints = set()
            for limb in e.params.get("limbs", []):
                joints.update(LIMB_JOINTS[limb])
            for name in e.params.get("joints", []):
                joints.add(_J[name])
            hide_changes.append((e.at_ms, frozenset(joints)))
        elif e.action == "false_positive":
            fp_spans.append((e.at_ms,
                             int(e.params.get("until_ms", script.duration_ms)),
                             float(e.params.get("height_ratio", 0.075))))
        elif e.action == "model":
            model_changes.append((e.at_ms, bool(e.params.get("present", True))))
        elif e.action in ("perform", "perform_partial", "fidget", "idle"):
            pass
        else:
            raise ValueError(f"unknown scenario action: {e.action!r}")

    model_neck = (MODEL_NECK_LEFT if script.model_side == "left"
                  else MODEL_NECK_RIGHT)
    neutral = analytic_poses()["neutral"]

    n_frames = int(round(script.duration_ms * fps / 1000.0))
    frames = []
    for i in range(n_frames):
        t = round(i * 1000.0 / fps)
        hidden = frozenset()
        for at, joints in hide_changes:
            if at <= t:
                hidden = joints
        model_present = True
        for at, present in model_changes:
            if at <= t:
                model_present = present

        pose, sigma = timeline.pose_at(t)
        arr = pose_to_array(pose, hidden)
        arr[:, 0] = arr[:, 0] * TORSO_PX + PARTICIPANT_NECK[0]
        arr[:, 1] = arr[:, 1] * TORSO_PX + PARTICIPANT_NECK[1]
        if sigma > 0:
            arr[:, :2] += rng.normal(0.0, sigma * TORSO_PX, size=(N_JOINTS, 2))
        skeletons = [Skeleton(arr)]

        if model_present:
            m = pose_to_array(neutral)
            m[:, 0] = m[:, 0] * TORSO_PX + model_neck[0]
            m[:, 1] = m[:, 1] * TORSO_PX + model_neck[1]
            skeletons.append(Skeleton(m))

        for at, until, ratio in fp_spans:
            if at <= t < until:
                fp = pose_to_array(neutral)
                fp[:, 0] = fp[:, 0] * TORSO_PX * ratio + FALSE_POSITIVE_CORNER[0]
                fp[:, 1] = fp[:, 1] * TORSO_PX * ratio + FALSE_POSITIVE_CORNER[1]
                skeletons.append(Skeleton(fp))

        frames.append(Frame(timestamp_ms=t, skeletons=tuple(skeletons),
                            source="simulated"))

    events.sort(key=lambda ev: ev[0])
    return frames, events
