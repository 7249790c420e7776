"""Scene cleanup: false-positive rejection, identity tracking, roles.

Turns raw multi-skeleton frames into a stable two-person scene. The
tracker state is a plain list of TrackedPerson values: operations take
the list in and return a new one, nothing is shared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

from .errors import AmbiguousRoles
from .kernels import (
    L_ANKLE, L_ELBOW, L_HIP, L_KNEE, L_SHOULDER, L_WRIST, NECK, NOSE,
    R_ANKLE, R_ELBOW, R_HIP, R_KNEE, R_SHOULDER, R_WRIST,
)
from .model import CONF_MIN_DEFAULT, Frame, Skeleton

MIN_HEIGHT_RATIO_DEFAULT = 0.30
MIN_COVERAGE_DEFAULT = 0.25
MAX_JUMP_DEFAULT = 1.5        # in units of the track's torso scale
TRACK_TTL_MS_DEFAULT = 1000
NECK_TRACE_LEN = 30

ROLE_PARTICIPANT = "participant"
ROLE_MODEL = "model"
ROLE_UNASSIGNED = "unassigned"

LIMB_JOINTS = {
    "head": (NOSE, NECK),
    "torso": (NECK, R_SHOULDER, L_SHOULDER),
    "r_arm": (R_SHOULDER, R_ELBOW, R_WRIST),
    "l_arm": (L_SHOULDER, L_ELBOW, L_WRIST),
    "r_leg": (R_HIP, R_KNEE, R_ANKLE),
    "l_leg": (L_HIP, L_KNEE, L_ANKLE),
}


@dataclass(frozen=True)
class VisibilityReport:
    """Per-limb visibility plus overall joint coverage."""
    head: bool
    torso: bool
    l_arm: bool
    r_arm: bool
    l_leg: bool
    r_leg: bool
    coverage: float

    def limb(self, name: str) -> bool:
        return getattr(self, name)


@dataclass(frozen=True)
class TrackedPerson:
    """One identity followed across frames."""
    track_id: int
    role: str                  # participant | model | unassigned
    last_skeleton: Skeleton
    last_seen_ms: int
    neck_trace: tuple          # up to NECK_TRACE_LEN recent (x, y) pairs

    def neck(self) -> tuple:
        return self.neck_trace[-1]


def visibility(skeleton: Skeleton,
               conf_min: float = CONF_MIN_DEFAULT) -> VisibilityReport:
    """Limb flags (a limb is visible iff all its defining joints are)
    and exact joint coverage."""
    mask = skeleton.visible_mask(conf_min)
    flags = {name: bool(all(mask[j] for j in joints))
             for name, joints in LIMB_JOINTS.items()}
    return VisibilityReport(coverage=float(mask.mean()), **flags)


def reject_false_positives(frame: Frame,
                           min_height_ratio: float = MIN_HEIGHT_RATIO_DEFAULT,
                           min_coverage: float = MIN_COVERAGE_DEFAULT,
                           conf_min: float = CONF_MIN_DEFAULT) -> Frame:
    """Drop detection artifacts like miniature wall-motif skeletons.

    A skeleton is dropped when its joint coverage is below min_coverage,
    or (only when the frame has several skeletons) when its bounding-box
    height is below min_height_ratio times the tallest skeleton's. The
    height threshold never exceeds its own input's, so the operation is
    idempotent, and the relative-height rule can never drop the tallest
    skeleton.
    """
    kept = [s for s in frame.skeletons if s.coverage(conf_min) >= min_coverage]
    if len(frame.skeletons) > 1:
        tallest = max((s.bbox_height(conf_min) for s in frame.skeletons),
                      default=0.0)
        floor = min_height_ratio * tallest
        kept = [s for s in kept if s.bbox_height(conf_min) >= floor]
    return replace(frame, skeletons=tuple(kept))


def _torso_scale_px(skeleton: Skeleton, conf_min: float) -> Optional[float]:
    """Pixel-space torso scale: neck to mid-hip, else 2x shoulder span."""
    mask = skeleton.visible_mask(conf_min)
    if not mask[NECK]:
        return None
    d = skeleton.data
    hips = [j for j in (R_HIP, L_HIP) if mask[j]]
    if hips:
        mx = sum(d[j, 0] for j in hips) / len(hips)
        my = sum(d[j, 1] for j in hips) / len(hips)
        dist = math.hypot(mx - d[NECK, 0], my - d[NECK, 1])
        if dist > 0:
            return dist
    if mask[R_SHOULDER] and mask[L_SHOULDER]:
        dist = math.hypot(d[R_SHOULDER, 0] - d[L_SHOULDER, 0],
                          d[R_SHOULDER, 1] - d[L_SHOULDER, 1])
        if dist > 0:
            return 2.0 * dist
    return None


def track(prev: list, frame: Frame,
          max_jump: float = MAX_JUMP_DEFAULT,
          track_ttl_ms: int = TRACK_TTL_MS_DEFAULT,
          conf_min: float = CONF_MIN_DEFAULT) -> list:
    """Greedy nearest-neighbor association on neck positions.

    Distances are measured in units of each track's last torso scale, so
    max_jump is camera-distance independent. Unmatched skeletons open
    new tracks; tracks unseen longer than track_ttl_ms are dropped;
    roles travel with their track. Skeletons without a visible neck are
    ignored (they cannot be anchored). Deterministic given identical
    inputs: ties break on (track_id, skeleton index).
    """
    now = frame.timestamp_ms
    alive = [t for t in prev if now - t.last_seen_ms <= track_ttl_ms]

    candidates = []
    for si, skel in enumerate(frame.skeletons):
        if not skel.visible_mask(conf_min)[NECK]:
            continue
        candidates.append((si, skel))

    pairs = []
    for ti, tr in enumerate(alive):
        scale = _torso_scale_px(tr.last_skeleton, conf_min) or 1.0
        tx, ty = tr.neck()
        for si, skel in candidates:
            nx, ny = skel.data[NECK, 0], skel.data[NECK, 1]
            dist = math.hypot(nx - tx, ny - ty) / scale
            if dist <= max_jump:
                pairs.append((dist, tr.track_id, si, ti))
    pairs.sort()

    used_tracks: set = set()
    used_skels: set = set()
    out = []
    for dist, _tid, si, ti in pairs:
        if ti in used_tracks or si in used_skels:
            continue
        used_tracks.add(ti)
        used_skels.add(si)
        tr = alive[ti]
        skel = frame.skeletons[si]
        trace = (tr.neck_trace + ((float(skel.data[NECK, 0]),
                                   float(skel.data[NECK, 1])),))[-NECK_TRACE_LEN:]
        out.append(replace(tr, last_skeleton=skel, last_seen_ms=now,
                           neck_trace=trace))

    for ti, tr in enumerate(alive):
        if ti not in used_tracks:
            out.append(tr)

    next_id = max((t.track_id for t in alive), default=-1) + 1
    for si, skel in candidates:
        if si in used_skels:
            continue
        neck = (float(skel.data[NECK, 0]), float(skel.data[NECK, 1]))
        out.append(TrackedPerson(track_id=next_id, role=ROLE_UNASSIGNED,
                                 last_skeleton=skel, last_seen_ms=now,
                                 neck_trace=(neck,)))
        next_id += 1

    out.sort(key=lambda t: t.track_id)
    return out


@dataclass(frozen=True)
class RolePolicy:
    """How participant/model roles are chosen.

    by_side: the model stands on the configured side of the image (two
    tracks required). by_operator: the console marked one track as the
    participant; a single other track becomes the model.
    """
    kind: str                        # "by_side" | "by_operator"
    model_on: str = "left"           # by_side: which side is the model
    participant_track: Optional[int] = None  # by_operator

    @classmethod
    def by_side(cls, model_on: str = "left") -> "RolePolicy":
        return cls(kind="by_side", model_on=model_on)

    @classmethod
    def by_operator(cls, participant_track: int) -> "RolePolicy":
        return cls(kind="by_operator", participant_track=participant_track)


def _mean_neck_x(tr: TrackedPerson) -> float:
    return sum(p[0] for p in tr.neck_trace) / len(tr.neck_trace)


def assign_roles(tracks: list, policy: RolePolicy) -> list:
    """Apply a role policy; roles are sticky once set.

    by_side is a no-op when roles are already assigned (reassign by
    sending a new by_operator policy); it raises AmbiguousRoles unless
    exactly two tracks are present. At most one participant and one
    model ever exist.
    """
    if policy.kind == "by_side":
        if any(t.role != ROLE_UNASSIGNED for t in tracks):
            return list(tracks)
        if len(tracks) != 2:
            raise AmbiguousRoles(
                f"by_side needs exactly 2 tracks, have {len(tracks)}")
        a, b = sorted(tracks, key=_mean_neck_x)
        model, participant = (a, b) if policy.model_on == "left" else (b, a)
        return sorted([replace(model, role=ROLE_MODEL),
                       replace(participant, role=ROLE_PARTICIPANT)],
                      key=lambda t: t.track_id)

    if policy.kind == "by_operator":
        if not any(t.track_id == policy.participant_track for t in tracks):
            raise AmbiguousRoles(
                f"no track with id {policy.participant_track}")
        out = []
        others = [t for t in tracks if t.track_id != policy.participant_track]
        lone_other = others[0].track_id if len(others) == 1 else None
        for t in tracks:
            if t.track_id == policy.participant_track:
                out.append(replace(t, role=ROLE_PARTICIPANT))
            elif t.track_id == lone_other:
                out.append(replace(t, role=ROLE_MODEL))
            else:
                out.append(replace(t, role=ROLE_UNASSIGNED))
        return out

    raise ValueError(f"unknown role policy kind: {policy.kind}")


def get_role(tracks: list, role: str) -> Optional[TrackedPerson]:
    for t in tracks:
        if t.role == role:
            return t
    return None
