"""Skeleton data types and joint-angle feature extraction.

Conventions (fixed across the whole package):
  - image coordinates, origin top-left, y increases DOWNWARD;
    "wrist above head" therefore means wrist.y < nose.y
  - 18-joint COCO body layout (kernels.defs has the index table)
  - a keypoint with confidence below conf_min is invisible and its
    coordinates carry no meaning
  - angles are interior planar angles in radians, clamped to [0, pi]
  - degenerate zero-length bones make the dependent angle invalid,
    never NaN
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .errors import Incomparable, MissingAnchor
from .kernels import (
    ANGLE_FEATURES, BOOL_FEATURES, FEATURE_MIRROR_MAP, FEATURE_NAMES,
    JOINT_NAMES, MIRROR_MAP, N_FEATURES, N_JOINTS, NECK,
    SCALE_HIPS, SCALE_SHOULDERS,
)

CONF_MIN_DEFAULT = 0.10
MIN_SHARED_ANGLES_DEFAULT = 2

# Feature slots that participate in similarity: the five angles plus the
# two wrist-above-head booleans. Length slots (extents, torso_len) do not.
SIMILARITY_FEATURES = ANGLE_FEATURES + BOOL_FEATURES


@dataclass(frozen=True)
class Keypoint:
    """One joint detection: image position plus confidence in [0, 1]."""
    x: float
    y: float
    confidence: float

    def visible(self, conf_min: float = CONF_MIN_DEFAULT) -> bool:
        return self.confidence >= conf_min


class Skeleton:
    """One person's 18 keypoints, stored as a read-only (18, 3) array.

    Columns are x, y, confidence. At least one joint must have nonzero
    confidence (all-zero detections are dropped at parse time).
    """

    __slots__ = ("data",)

    def __init__(self, data: np.ndarray):
        arr = np.asarray(data, dtype=np.float64)
        if arr.shape != (N_JOINTS, 3):
            raise ValueError(f"skeleton array must be (18, 3), got {arr.shape}")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_flat(cls, flat) -> "Skeleton":
        arr = np.asarray(flat, dtype=np.float64)
        if arr.size != N_JOINTS * 3:
            raise ValueError(f"expected {N_JOINTS * 3} values, got {arr.size}")
        return cls(arr.reshape(N_JOINTS, 3))

    def __setattr__(self, name, value):
        raise AttributeError("Skeleton is immutable")

    def keypoint(self, j: int) -> Keypoint:
        x, y, c = self.data[j]
        return Keypoint(float(x), float(y), float(c))

    def visible_mask(self, conf_min: float = CONF_MIN_DEFAULT) -> np.ndarray:
        return self.data[:, 2] >= conf_min

    def coverage(self, conf_min: float = CONF_MIN_DEFAULT) -> float:
        return float(self.visible_mask(conf_min).mean())

    def bbox_height(self, conf_min: float = CONF_MIN_DEFAULT) -> float:
        """Height of the bounding box over visible joints (0 if none)."""
        mask = self.visible_mask(conf_min)
        if not mask.any():
            return 0.0
        ys = self.data[mask, 1]
        return float(ys.max() - ys.min())

    def __eq__(self, other) -> bool:
        return isinstance(other, Skeleton) and np.array_equal(self.data, other.data)

    def __hash__(self):
        return hash(self.data.tobytes())

    def __repr__(self):
        vis = int(self.visible_mask().sum())
        return f"Skeleton(visible={vis}/{N_JOINTS})"


@dataclass(frozen=True)
class Frame:
    """Timestamped set of raw skeletons from one camera image."""
    timestamp_ms: int
    skeletons: tuple
    source: str = "replay"  # replay | live | simulated


@dataclass(frozen=True, eq=False)
class NormalizedSkeleton:
    """Neck-origin, torso-unit-scale skeleton.

    scale_source records which reference set the unit: "hips" (neck to
    mid-hip distance) or "shoulders" (2x shoulder-to-shoulder fallback
    for upper-body-only framings).
    """
    xy: np.ndarray            # (18, 2), zeros where invisible
    visible: np.ndarray       # (18,) bool
    scale_source: str         # "hips" | "shoulders"

    def __post_init__(self):
        self.xy.flags.writeable = False
        self.visible.flags.writeable = False


_NAME_TO_SLOT = {name: i for i, name in enumerate(FEATURE_NAMES)}


@dataclass(frozen=True, eq=False)
class AngleFeatures:
    """Named pose features with per-slot validity.

    Slots 0-4 are angles in [0, pi], 5-6 booleans (0.0/1.0), 7-9
    normalized lengths; kernels.defs documents each. Access by name via
    value()/is_valid() or the generated properties (r_elbow, ...).
    """
    values: np.ndarray  # (N_FEATURES,)
    valid: np.ndarray   # (N_FEATURES,) bool

    def __post_init__(self):
        self.values.flags.writeable = False
        self.valid.flags.writeable = False

    def value(self, name: str) -> Optional[float]:
        i = _NAME_TO_SLOT[name]
        return float(self.values[i]) if self.valid[i] else None

    def is_valid(self, name: str) -> bool:
        return bool(self.valid[_NAME_TO_SLOT[name]])

    def mirrored(self) -> "AngleFeatures":
        """Left/right feature names swapped; torso features unchanged."""
        idx = np.array(FEATURE_MIRROR_MAP)
        return AngleFeatures(self.values[idx].copy(), self.valid[idx].copy())

    def as_dict(self) -> dict:
        return {name: self.value(name) for name in FEATURE_NAMES}

    def __repr__(self):
        parts = [f"{n}={self.value(n):.3f}" for n in FEATURE_NAMES
                 if self.is_valid(n)]
        return "AngleFeatures(" + ", ".join(parts) + ")"


def _feature_property(name):
    def get(self):
        return self.value(name)
    get.__name__ = name
    return property(get)


for _name in FEATURE_NAMES:
    setattr(AngleFeatures, _name, _feature_property(_name))


def normalize(skeleton: Skeleton,
              conf_min: float = CONF_MIN_DEFAULT) -> NormalizedSkeleton:
    """Translate the neck to the origin and divide by the torso scale.

    Scale is the neck-to-mid-hip distance when at least one hip is
    visible, else 2x the shoulder-to-shoulder distance. Raises
    MissingAnchor when the neck is invisible or no scale reference
    exists (the frame is unusable for matching).
    """
    xy, vis, source, ok = kernels.normalize_batch(
        skeleton.data[None, :, :], conf_min)
    if not ok[0]:
        raise MissingAnchor("neck invisible or no torso/shoulder scale reference")
    name = "hips" if source[0] == SCALE_HIPS else "shoulders"
    return NormalizedSkeleton(xy[0], vis[0], name)


def extract_features(skeleton: NormalizedSkeleton) -> AngleFeatures:
    """Compute the feature vector of a normalized skeleton.

    Each feature is valid only when all of its defining joints are
    visible and no defining bone is degenerate; an all-invalid feature
    set is legal output.
    """
    values, valid = kernels.features_batch(
        skeleton.xy[None, :, :], skeleton.visible[None, :])
    return AngleFeatures(values[0], valid[0])


def mirror(skeleton: Skeleton) -> Skeleton:
    """Chirality-swapped skeleton: joint labels swapped left/right and x
    coordinates reflected about the neck's x.

    The stored neck x is used as the reflection axis even when the neck
    confidence is below the floor (those coordinates are equally
    meaningless before and after). mirror(mirror(s)) == s holds exactly
    for coordinates on a binary sub-pixel grid, which covers real pose
    detector output.
    """
    data = skeleton.data
    axis2 = 2.0 * data[NECK, 0]
    out = data[list(MIRROR_MAP)].copy()
    out[:, 0] = axis2 - out[:, 0]
    return Skeleton(out)


def similarity(a: AngleFeatures, b: AngleFeatures,
               min_shared_angles: int = MIN_SHARED_ANGLES_DEFAULT) -> float:
    """Pose similarity in [0, 1]: 1 - mean(|delta|)/pi over the features
    valid in BOTH inputs (angles directly; booleans contribute 0 or pi).

    Raises Incomparable when fewer than min_shared_angles features are
    shared (e.g. heavy occlusion on either side).
    """
    idx = np.array(SIMILARITY_FEATURES)
    shared = a.valid[idx] & b.valid[idx]
    if int(shared.sum()) < min_shared_angles:
        raise Incomparable(
            f"only {int(shared.sum())} shared features, need {min_shared_angles}")
    av = a.values[idx][shared]
    bv = b.values[idx][shared]
    deltas = np.abs(av - bv)
    bool_pos = np.isin(idx[shared], BOOL_FEATURES)
    deltas[bool_pos] = np.where(deltas[bool_pos] > 0, np.pi, 0.0)
    return float(1.0 - deltas.mean() / np.pi)


def joint_index(name: str) -> int:
    return JOINT_NAMES.index(name)
