"""Exercise gesture templates and the keyframe matching automaton.

A gesture is an ordered list of keyframes; each keyframe is a set of
feature constraints that must hold continuously for hold_ms before the
automaton advances. A match succeeds when the last keyframe completes
within the template timeout. Matching always runs on the direct AND the
chirality-swapped feature stream, so a participant mirroring the
demonstration still scores (the winning side is reported; ties go to
direct).

The three built-in templates cover the session's exercise movements:
raising both arms overhead, lateral arms then a forward bend, and arms
forward then a deep bend toward the toes. Arms-forward is depth
ambiguous in a 2D view, so it is detected through the compression of
the image-plane wrist-to-shoulder distance. Bends are read from the
torso incline. No template requires leg visibility: the lower body is
routinely outside the camera frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from . import kernels
from .errors import EmptyStream, Incomparable, WindowTooSmall
from .kernels import FEATURE_NAMES, N_FEATURES
from .model import (
    CONF_MIN_DEFAULT, AngleFeatures, Frame, NormalizedSkeleton,
    Skeleton, similarity,
)

PI = math.pi

HOLD_MS_DEFAULT = 500
TIMEOUT_MS_DEFAULT = 20000
ANGLE_TOL_DEFAULT = 0.35
BEND_THRESHOLD_DEFAULT = 0.6          # rad of torso incline that counts as bent
ATTEMPT_ENERGY_MIN_DEFAULT = 0.02     # normalized units per frame at 15 fps
UNSCOREABLE_FRACTION_DEFAULT = 0.5
RHYTHM_CHANGE_RATIO_DEFAULT = 1.5
ARM_EXTENT_COMPRESSED_DEFAULT = 0.35  # fraction of torso length

STATUS_SUCCESS = "success"
STATUS_ATTEMPT_FAILED = "attempt_failed"
STATUS_NO_ATTEMPT = "no_attempt"
STATUS_UNSCOREABLE = "unscoreable"

CHIRALITY_DIRECT = "direct"
CHIRALITY_MIRRORED = "mirrored"

_SLOT = {name: i for i, name in enumerate(FEATURE_NAMES)}

# A limb counts as visible for matching when its representative feature
# is computable (same defining joints).
_LIMB_FEATURES = {
    "r_arm": ("r_elbow",),
    "l_arm": ("l_elbow",),
    "head": ("r_wrist_above_head", "l_wrist_above_head"),  # either wrist+nose
    "torso": ("torso_incline",),
}


@dataclass(frozen=True)
class MatchConfig:
    hold_ms: int = HOLD_MS_DEFAULT
    timeout_ms: int = TIMEOUT_MS_DEFAULT
    angle_tolerance: float = ANGLE_TOL_DEFAULT
    bend_threshold: float = BEND_THRESHOLD_DEFAULT
    attempt_energy_min: float = ATTEMPT_ENERGY_MIN_DEFAULT
    unscoreable_fraction: float = UNSCOREABLE_FRACTION_DEFAULT
    rhythm_change_ratio: float = RHYTHM_CHANGE_RATIO_DEFAULT
    arm_extent_compressed: float = ARM_EXTENT_COMPRESSED_DEFAULT


@dataclass(frozen=True)
class Constraint:
    """|feature - target| <= tolerance must hold for the keyframe."""
    feature: str
    target: float
    tolerance: float

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")


@dataclass(frozen=True)
class KeyframeSpec:
    constraints: tuple            # of Constraint
    required_bools: tuple = ()    # of (feature name, bool)
    hold_ms: int = HOLD_MS_DEFAULT
    required_limbs: tuple = ()

    def satisfied_by(self, f: AngleFeatures) -> bool:
        for c in self.constraints:
            i = _SLOT[c.feature]
            if not f.valid[i] or abs(f.values[i] - c.target) > c.tolerance:
                return False
        for name, want in self.required_bools:
            i = _SLOT[name]
            if not f.valid[i] or bool(f.values[i] > 0.5) != want:
                return False
        return True

    def target_features(self) -> AngleFeatures:
        """Synthetic feature vector at the constraint targets (used for
        similarity-based progress reporting)."""
        values = np.zeros(N_FEATURES)
        valid = np.zeros(N_FEATURES, dtype=bool)
        for c in self.constraints:
            i = _SLOT[c.feature]
            values[i] = c.target
            valid[i] = True
        for name, want in self.required_bools:
            i = _SLOT[name]
            values[i] = 1.0 if want else 0.0
            valid[i] = True
        return AngleFeatures(values, valid)


@dataclass(frozen=True)
class GestureTemplate:
    name: str
    keyframes: tuple              # of KeyframeSpec, matched in order
    timeout_ms: int = TIMEOUT_MS_DEFAULT

    def __post_init__(self):
        if not self.keyframes:
            raise ValueError("template needs at least one keyframe")

    def required_limbs(self) -> tuple:
        seen: list = []
        for kf in self.keyframes:
            for limb in kf.required_limbs:
                if limb not in seen:
                    seen.append(limb)
        return tuple(seen)


@dataclass(frozen=True)
class MatchResult:
    status: str                   # success | attempt_failed | no_attempt | unscoreable
    chirality: str                # direct | mirrored (winning side; ties direct)
    keyframe_times_ms: tuple      # completion time of each matched keyframe
    best_similarity: tuple        # best per-keyframe similarity achieved
    progress_direct: int          # keyframes completed on each side
    progress_mirrored: int
    energy: float                 # mean per-frame displacement over the window

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "chirality": self.chirality,
            "keyframe_times_ms": list(self.keyframe_times_ms),
            "best_similarity": [round(s, 4) for s in self.best_similarity],
            "progress_direct": self.progress_direct,
            "progress_mirrored": self.progress_mirrored,
            "energy": round(self.energy, 6),
        }


@dataclass(frozen=True)
class MotionStats:
    window_ms: int
    energy: float                       # mean per-frame L1 joint displacement
    rhythm_period_ms: Optional[float]   # dominant inter-peak interval, if any


@dataclass(frozen=True)
class PoseCommand:
    """Mirror-imitation target: the chirality-swapped participant pose,
    as named feature targets. Invalid source features are omitted."""
    t_ms: int
    targets: dict


@dataclass(frozen=True, eq=False)
class FeatureFrame:
    """One stream sample: features plus the normalized joints they came
    from (xy/visible are None when the frame could not be normalized)."""
    t_ms: int
    features: AngleFeatures
    xy: Optional[np.ndarray] = None
    visible: Optional[np.ndarray] = None


def builtin_templates(config: MatchConfig = MatchConfig()) -> list:
    """The three exercise movements as keyframe templates."""
    tol = config.angle_tolerance
    hold = config.hold_ms
    timeout = config.timeout_ms

    raise_arms_sky = GestureTemplate(
        name="raise_arms_sky",
        timeout_ms=timeout,
        keyframes=(
            KeyframeSpec(
                constraints=(
                    Constraint("r_shoulder_elev", PI, tol),
                    Constraint("l_shoulder_elev", PI, tol),
                    Constraint("r_elbow", PI, tol),
                    Constraint("l_elbow", PI, tol),
                ),
                required_bools=(("r_wrist_above_head", True),
                                ("l_wrist_above_head", True)),
                hold_ms=hold,
                required_limbs=("r_arm", "l_arm", "head"),
            ),
        ),
    )

    # Lateral arms at shoulder height, then a bend read from the torso
    # incline. The bend band's lower edge sits at the configured
    # threshold: [bend_threshold, bend_threshold + 0.9].
    bend_lo = config.bend_threshold
    arms_side_bend_forward = GestureTemplate(
        name="arms_side_bend_forward",
        timeout_ms=timeout,
        keyframes=(
            KeyframeSpec(
                constraints=(
                    Constraint("r_shoulder_elev", PI / 2, tol),
                    Constraint("l_shoulder_elev", PI / 2, tol),
                    Constraint("r_elbow", PI, tol),
                    Constraint("l_elbow", PI, tol),
                ),
                required_bools=(("r_wrist_above_head", False),
                                ("l_wrist_above_head", False)),
                hold_ms=hold,
                required_limbs=("r_arm", "l_arm"),
            ),
            KeyframeSpec(
                constraints=(
                    Constraint("torso_incline", bend_lo + 0.45, 0.45),
                ),
                hold_ms=hold,
                required_limbs=("torso",),
            ),
        ),
    )

    # Arms forward reads as 2D arm-extent compression; the toe bend is a
    # deeper incline with straight arms reaching down.
    ext = config.arm_extent_compressed
    arms_forward_bend_toes = GestureTemplate(
        name="arms_forward_bend_toes",
        timeout_ms=timeout,
        keyframes=(
            KeyframeSpec(
                constraints=(
                    Constraint("r_arm_extent", 0.0, ext),
                    Constraint("l_arm_extent", 0.0, ext),
                ),
                required_bools=(("r_wrist_above_head", False),
                                ("l_wrist_above_head", False)),
                hold_ms=hold,
                required_limbs=("r_arm", "l_arm"),
            ),
            KeyframeSpec(
                constraints=(
                    Constraint("torso_incline", bend_lo + 0.70, 0.50),
                    Constraint("r_elbow", PI, 0.45),
                    Constraint("l_elbow", PI, 0.45),
                ),
                hold_ms=hold,
                required_limbs=("torso", "r_arm", "l_arm"),
            ),
        ),
    )

    return [raise_arms_sky, arms_side_bend_forward, arms_forward_bend_toes]


def template_by_name(name: str,
                     config: MatchConfig = MatchConfig()) -> GestureTemplate:
    for t in builtin_templates(config):
        if t.name == name:
            return t
    raise KeyError(name)


def _limbs_visible(f: AngleFeatures, limbs: Sequence[str]) -> bool:
    for limb in limbs:
        names = _LIMB_FEATURES[limb]
        if not any(f.is_valid(n) for n in names):
            return False
    return True


class _ChiralityTrack:
    """Sequential keyframe automaton for one feature orientation."""

    __slots__ = ("template", "kf_index", "hold_start_ms", "times", "best_sim",
                 "_targets")

    def __init__(self, template: GestureTemplate):
        self.template = template
        self.kf_index = 0
        self.hold_start_ms: Optional[int] = None
        self.times: list = []
        self.best_sim = [0.0] * len(template.keyframes)
        self._targets = [kf.target_features() for kf in template.keyframes]

    @property
    def done(self) -> bool:
        return self.kf_index >= len(self.template.keyframes)

    def push(self, t_ms: int, f: AngleFeatures) -> None:
        if self.done:
            return
        kf = self.template.keyframes[self.kf_index]
        try:
            sim = similarity(f, self._targets[self.kf_index], 1)
            if sim > self.best_sim[self.kf_index]:
                self.best_sim[self.kf_index] = sim
        except Incomparable:
            pass
        if kf.satisfied_by(f):
            if self.hold_start_ms is None:
                self.hold_start_ms = t_ms
            if t_ms - self.hold_start_ms >= kf.hold_ms:
                self.times.append(t_ms)
                self.kf_index += 1
                self.hold_start_ms = None
        else:
            self.hold_start_ms = None


class GestureMatcher:
    """Incremental matcher; feed FeatureFrames, then finalize().

    The window starts at the first pushed frame; frames after the
    template timeout no longer advance the automaton (they still count
    toward energy and scoreability). Pure state machine: identical
    pushes always produce the identical result.
    """

    def __init__(self, template: GestureTemplate,
                 config: MatchConfig = MatchConfig()):
        self.template = template
        self.config = config
        self.direct = _ChiralityTrack(template)
        self.mirrored = _ChiralityTrack(template)
        self.start_ms: Optional[int] = None
        self.n_frames = 0
        self.n_unscoreable = 0
        self._disp_sum = 0.0
        self._disp_pairs = 0
        self._last_xy: Optional[np.ndarray] = None
        self._last_vis: Optional[np.ndarray] = None
        self._required = template.required_limbs()

    @property
    def concluded(self) -> bool:
        return self.direct.done or self.mirrored.done

    def push(self, frame: FeatureFrame) -> None:
        if self.start_ms is None:
            self.start_ms = frame.t_ms
        self.n_frames += 1
        if not _limbs_visible(frame.features, self._required):
            self.n_unscoreable += 1

        if frame.xy is not None and self._last_xy is not None:
            d = kernels.displacement_series(
                np.stack([self._last_xy, frame.xy]),
                np.stack([self._last_vis, frame.visible]))
            self._disp_sum += float(d[0])
            self._disp_pairs += 1
        if frame.xy is not None:
            self._last_xy = frame.xy
            self._last_vis = frame.visible

        if frame.t_ms - self.start_ms <= self.template.timeout_ms:
            self.direct.push(frame.t_ms, frame.features)
            self.mirrored.push(frame.t_ms, frame.features.mirrored())

    def energy(self) -> float:
        if self._disp_pairs == 0:
            return 0.0
        return self._disp_sum / self._disp_pairs

    def finalize(self) -> MatchResult:
        if self.n_frames == 0:
            raise EmptyStream("no frames supplied to matcher")
        p_d = self.direct.kf_index
        p_m = self.mirrored.kf_index
        winner = self.direct if p_d >= p_m else self.mirrored
        chirality = CHIRALITY_DIRECT if p_d >= p_m else CHIRALITY_MIRRORED

        energy = self.energy()
        if winner.done:
            status = STATUS_SUCCESS
        elif self.n_unscoreable / self.n_frames > self.config.unscoreable_fraction:
            status = STATUS_UNSCOREABLE
        elif energy > self.config.attempt_energy_min or max(p_d, p_m) > 0:
            status = STATUS_ATTEMPT_FAILED
        else:
            status = STATUS_NO_ATTEMPT

        return MatchResult(
            status=status,
            chirality=chirality,
            keyframe_times_ms=tuple(winner.times),
            best_similarity=tuple(winner.best_sim),
            progress_direct=p_d,
            progress_mirrored=p_m,
            energy=energy,
        )


def match_gesture(stream: Iterable[FeatureFrame],
                  template: GestureTemplate,
                  config: MatchConfig = MatchConfig()) -> MatchResult:
    """Run the keyframe automaton over a complete feature stream.

    Raises EmptyStream when no frames are supplied. Deterministic and
    pure: the result is a function of (stream, template, config) only.
    """
    matcher = GestureMatcher(template, config)
    last_t: Optional[int] = None
    for frame in stream:
        if last_t is not None and frame.t_ms <= last_t:
            raise ValueError("feature stream timestamps must strictly increase")
        last_t = frame.t_ms
        matcher.push(frame)
    return matcher.finalize()


def feature_frames(frames: Iterable[Frame],
                   conf_min: float = CONF_MIN_DEFAULT,
                   pick=None) -> list:
    """Batch-extract FeatureFrames from raw Frames (the hot path).

    pick chooses one skeleton per frame (defaults to the first); frames
    with no skeleton or no usable anchor yield all-invalid features so
    scoreability accounting still sees them.
    """
    frames = list(frames)
    n = len(frames)
    raw = np.zeros((n, 18, 3))
    present = np.zeros(n, dtype=bool)
    for i, fr in enumerate(frames):
        skel = pick(fr) if pick else (fr.skeletons[0] if fr.skeletons else None)
        if skel is not None:
            raw[i] = skel.data
            present[i] = True

    xy, vis, _src, ok = kernels.normalize_batch(raw, conf_min)
    ok = ok & present
    values, valid = kernels.features_batch(xy, vis)
    values[~ok] = 0.0
    valid[~ok] = False

    out = []
    for i, fr in enumerate(frames):
        ff = FeatureFrame(
            t_ms=fr.timestamp_ms,
            features=AngleFeatures(values[i], valid[i]),
            xy=xy[i] if ok[i] else None,
            visible=vis[i] if ok[i] else None,
        )
        out.append(ff)
    return out


def mirror_pose_command(participant: NormalizedSkeleton,
                        t_ms: int = 0) -> PoseCommand:
    """Imitation target for a facing model: the participant's features
    with chirality swapped, invalid entries omitted."""
    from .model import extract_features
    f = extract_features(participant).mirrored()
    targets = {}
    for name in FEATURE_NAMES:
        v = f.value(name)
        if v is not None:
            targets[name] = v
    return PoseCommand(t_ms=t_ms, targets=targets)


def motion_stats(window: Sequence[FeatureFrame],
                 window_ms: Optional[int] = None) -> MotionStats:
    """Movement energy and rhythm over a window of FeatureFrames.

    Energy is the mean per-frame L1 displacement of joints visible in
    consecutive frames. Rhythm is the median interval between peaks of
    the smoothed energy signal (None without at least two peaks). The
    result is advisory: the operator confirms any reaction it suggests.
    """
    if len(window) < 2:
        raise WindowTooSmall(f"need >= 2 frames, have {len(window)}")
    if window_ms is None:
        window_ms = window[-1].t_ms - window[0].t_ms

    disp = []
    times = []
    prev = None
    for fr in window:
        if fr.xy is None:
            continue
        if prev is not None:
            d = kernels.displacement_series(
                np.stack([prev.xy, fr.xy]), np.stack([prev.visible, fr.visible]))
            disp.append(float(d[0]))
            times.append(fr.t_ms)
        prev = fr
    if not disp:
        return MotionStats(window_ms=window_ms, energy=0.0, rhythm_period_ms=None)

    disp_arr = np.array(disp)
    energy = float(disp_arr.mean())

    rhythm = None
    if disp_arr.max() > 0:
        k = min(5, len(disp_arr))
        kernel = np.ones(k) / k
        smooth = np.convolve(disp_arr, kernel, mode="same")
        floor = 0.5 * smooth.max()
        peaks = [i for i in range(1, len(smooth) - 1)
                 if smooth[i] >= floor
                 and smooth[i] > smooth[i - 1] and smooth[i] >= smooth[i + 1]]
        if len(peaks) >= 2:
            intervals = [times[b] - times[a] for a, b in zip(peaks, peaks[1:])]
            rhythm = float(np.median(intervals))
    return MotionStats(window_ms=window_ms, energy=energy,
                       rhythm_period_ms=rhythm)


def activity_change(prev: MotionStats, cur: MotionStats,
                    ratio: float = RHYTHM_CHANGE_RATIO_DEFAULT) -> bool:
    """True when energy jumped or dropped by more than the ratio between
    consecutive windows (a suggestion trigger, never a score)."""
    return cur.energy > prev.energy * ratio or prev.energy > cur.energy * ratio
