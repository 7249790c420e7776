"""Pose-model unit and property tests."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from imigame.errors import Incomparable, MissingAnchor
from imigame.kernels import JOINT_NAMES, N_JOINTS
from imigame.model import (
    Skeleton, extract_features, mirror, normalize, similarity,
)

from conftest import GRID, random_skeletons, skeleton_from_pose

PI = math.pi
J = {name: i for i, name in enumerate(JOINT_NAMES)}


def features_of(pose_name, **kwargs):
    return extract_features(normalize(skeleton_from_pose(pose_name, **kwargs)))


# -- normalize ---------------------------------------------------------------

def test_translation_invariance(neutral_skeleton):
    data = neutral_skeleton.data.copy()
    shifted = data.copy()
    shifted[:, 0] += 50.0
    shifted[:, 1] += 120.0
    a = normalize(neutral_skeleton)
    b = normalize(Skeleton(shifted))
    np.testing.assert_allclose(b.xy, a.xy, atol=1e-9)
    assert (a.visible == b.visible).all()


def test_scale_invariance(neutral_skeleton):
    data = neutral_skeleton.data.copy()
    doubled = data.copy()
    doubled[:, :2] *= 2.0
    a = normalize(neutral_skeleton)
    b = normalize(Skeleton(doubled))
    np.testing.assert_allclose(b.xy, a.xy, atol=1e-9)


def test_shoulder_fallback_scale():
    # both hips hidden: scale must be 2x the shoulder span
    skel = skeleton_from_pose("neutral", hidden=("r_hip", "l_hip", "r_knee",
                                                 "l_knee", "r_ankle", "l_ankle"))
    ns = normalize(skel)
    assert ns.scale_source == "shoulders"
    d = skel.data
    span = math.hypot(d[J["r_shoulder"], 0] - d[J["l_shoulder"], 0],
                      d[J["r_shoulder"], 1] - d[J["l_shoulder"], 1])
    # hand-computed: normalized shoulder x = pixel offset / (2 * span)
    expect_x = (d[J["r_shoulder"], 0] - d[J["neck"], 0]) / (2.0 * span)
    assert ns.xy[J["r_shoulder"], 0] == pytest.approx(expect_x, abs=1e-12)


def test_missing_anchor_neck():
    skel = skeleton_from_pose("neutral", hidden=("neck",))
    with pytest.raises(MissingAnchor):
        normalize(skel)


def test_missing_anchor_no_scale():
    hidden = ("r_hip", "l_hip", "r_shoulder")  # no hips, one shoulder
    skel = skeleton_from_pose("neutral", hidden=hidden)
    with pytest.raises(MissingAnchor):
        normalize(skel)


def test_zero_length_torso_falls_back_to_shoulders():
    arr = skeleton_from_pose("neutral").data.copy()
    arr[J["r_hip"], :2] = arr[J["neck"], :2]
    arr[J["l_hip"], :2] = arr[J["neck"], :2]
    ns = normalize(Skeleton(arr))
    assert ns.scale_source == "shoulders"


# -- extract_features --------------------------------------------------------

def test_tpose_features():
    f = features_of("tpose")
    assert f.r_elbow == pytest.approx(PI, abs=1e-6)
    assert f.l_elbow == pytest.approx(PI, abs=1e-6)
    assert f.r_shoulder_elev == pytest.approx(PI / 2, abs=1e-6)
    assert f.l_shoulder_elev == pytest.approx(PI / 2, abs=1e-6)


def test_arms_down_features():
    f = features_of("neutral")
    assert f.r_shoulder_elev == pytest.approx(0.0, abs=1e-6)
    assert f.l_shoulder_elev == pytest.approx(0.0, abs=1e-6)
    assert f.r_wrist_above_head == 0.0
    assert f.l_wrist_above_head == 0.0


def test_overhead_features():
    f = features_of("overhead")
    assert f.r_wrist_above_head == 1.0
    assert f.l_wrist_above_head == 1.0
    assert f.r_shoulder_elev == pytest.approx(PI, abs=1e-6)
    assert f.l_shoulder_elev == pytest.approx(PI, abs=1e-6)


def test_invalid_when_joints_hidden():
    f = features_of("neutral", hidden=("r_wrist",))
    assert f.r_elbow is None
    assert f.r_arm_extent is None
    assert f.l_elbow is not None


def test_zero_length_bone_invalid_not_nan():
    arr = skeleton_from_pose("neutral").data.copy()
    arr[J["r_elbow"], :2] = arr[J["r_shoulder"], :2]  # coincident joints
    f = extract_features(normalize(Skeleton(arr)))
    assert f.r_shoulder_elev is None
    assert np.isfinite(f.values).all()


def test_all_invalid_features_is_legal():
    # only neck and shoulders visible: arms/head features all invalid
    hidden = tuple(n for n in JOINT_NAMES
                   if n not in ("neck", "r_shoulder", "l_shoulder"))
    f = features_of("neutral", hidden=hidden)
    assert not f.valid[:7].any()


# -- mirror ------------------------------------------------------------------

def test_mirror_swaps_visibility():
    skel = skeleton_from_pose("neutral",
                              hidden=tuple(n for n in JOINT_NAMES
                                           if n != "r_wrist"))
    m = mirror(skel)
    assert m.visible_mask()[J["l_wrist"]]
    assert not m.visible_mask()[J["r_wrist"]]


def test_mirror_symmetric_fixed_point():
    skel = skeleton_from_pose("neutral")
    m = mirror(skel)
    np.testing.assert_allclose(m.data, skel.data, atol=1e-9)


def test_mirror_involution_exact(rng):
    for skel in random_skeletons(rng, 200):
        assert mirror(mirror(skel)) == skel


def test_mirror_reflects_about_neck():
    skel = skeleton_from_pose("tpose")
    m = mirror(skel)
    neck_x = skel.data[J["neck"], 0]
    # right wrist lands where the left wrist was, reflected
    assert m.data[J["r_wrist"], 0] == pytest.approx(
        2 * neck_x - skel.data[J["l_wrist"], 0], abs=1e-9)


def test_mirror_feature_swap_property(rng):
    for skel in random_skeletons(rng, 100):
        try:
            direct = extract_features(normalize(skel))
            mirrored = extract_features(normalize(mirror(skel)))
        except MissingAnchor:
            continue
        assert mirrored.is_valid("l_elbow") == direct.is_valid("r_elbow")
        if direct.r_elbow is not None:
            assert mirrored.l_elbow == pytest.approx(direct.r_elbow, abs=1e-9)
        if direct.torso_incline is not None:
            assert mirrored.torso_incline == pytest.approx(
                direct.torso_incline, abs=1e-9)


# -- similarity --------------------------------------------------------------

def test_similarity_identity():
    f = features_of("tpose")
    assert similarity(f, f) == 1.0


def test_similarity_overhead_vs_hanging_pinned():
    # hand-derived: elbows agree (delta 0, 0), elevations differ by pi
    # twice, incline agrees, both booleans flip (pi each)
    # -> 1 - (4*pi/7)/pi = 3/7
    a = features_of("overhead")
    b = features_of("neutral")
    val = similarity(a, b)
    assert val == pytest.approx(3.0 / 7.0, rel=1e-12)
    assert val < 0.5


def test_similarity_incomparable():
    a = features_of("neutral", hidden=("l_elbow", "l_wrist", "nose",
                                       "r_hip", "l_hip"))
    b = features_of("neutral", hidden=("r_elbow", "r_wrist", "nose",
                                       "r_hip", "l_hip"))
    # a has only r_elbow-ish features valid, b only l_elbow-ish
    with pytest.raises(Incomparable):
        similarity(a, b)


def test_similarity_symmetric_and_bounded(rng):
    skels = random_skeletons(rng, 60)
    feats = []
    for s in skels:
        try:
            feats.append(extract_features(normalize(s)))
        except MissingAnchor:
            pass
    for i in range(0, len(feats) - 1, 2):
        try:
            ab = similarity(feats[i], feats[i + 1])
            ba = similarity(feats[i + 1], feats[i])
        except Incomparable:
            continue
        assert ab == pytest.approx(ba, abs=1e-12)
        assert 0.0 <= ab <= 1.0


# -- hypothesis properties ---------------------------------------------------

coord = st.integers(0, 8000).map(lambda v: v * GRID)
confidence = st.sampled_from([0.0, 0.05, 0.3, 0.9, 1.0])


@st.composite
def skeletons(draw):
    vals = []
    for _ in range(N_JOINTS):
        vals.append((draw(coord), draw(coord), draw(confidence)))
    arr = np.array(vals)
    if (arr[:, 2] == 0).all():
        arr[0, 2] = 0.9
    return Skeleton(arr)


@settings(max_examples=150, deadline=None)
@given(skeletons())
def test_prop_mirror_involution(s):
    assert mirror(mirror(s)) == s


@settings(max_examples=150, deadline=None)
@given(skeletons())
def test_prop_angles_in_range_no_nan(s):
    try:
        ns = normalize(s)
    except MissingAnchor:
        return
    f = extract_features(ns)
    assert np.isfinite(f.values).all()
    assert (f.values[:5] >= 0).all()
    assert (f.values[:5] <= PI + 1e-12).all()


@settings(max_examples=100, deadline=None)
@given(skeletons(), skeletons())
def test_prop_similarity_range(a, b):
    try:
        fa = extract_features(normalize(a))
        fb = extract_features(normalize(b))
        val = similarity(fa, fb)
    except (MissingAnchor, Incomparable):
        return
    assert 0.0 <= val <= 1.0
    assert similarity(fb, fa) == pytest.approx(val, abs=1e-12)
