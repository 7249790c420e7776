"""Gesture template and matcher tests."""

import math

import pytest

from imigame.errors import EmptyStream, WindowTooSmall
from imigame.gestures import (
    Constraint, FeatureFrame, GestureTemplate, KeyframeSpec, MatchConfig,
    activity_change, builtin_templates, feature_frames, match_gesture,
    mirror_pose_command, motion_stats, template_by_name,
)
from imigame.model import extract_features, mirror, normalize
from imigame.simulate import ScenarioScript, simulate

from conftest import skeleton_from_pose

PI = math.pi


def stream_for(timeline, duration_ms=8000, seed=1, fps=15):
    script = ScenarioScript.from_dict({
        "participant": "X", "fps": fps, "seed": seed,
        "duration_ms": duration_ms, "timeline": timeline})
    frames, _ = simulate(script)
    return feature_frames(frames, pick=lambda fr: fr.skeletons[0])


def perform_stream(gesture, chirality="direct", sigma=0.0, at_ms=1000,
                   duration_ms=8000, seed=1):
    return stream_for(
        [{"at_ms": at_ms, "action": "perform", "gesture": gesture,
          "chirality": chirality, "sigma": sigma}],
        duration_ms=duration_ms, seed=seed)


# -- templates ----------------------------------------------------------------

def test_three_builtin_templates():
    templates = builtin_templates()
    assert [t.name for t in templates] == [
        "raise_arms_sky", "arms_side_bend_forward", "arms_forward_bend_toes"]


def test_overhead_pose_satisfies_raise_arms_keyframe():
    f = extract_features(normalize(skeleton_from_pose("overhead")))
    kf = template_by_name("raise_arms_sky").keyframes[0]
    assert kf.satisfied_by(f)


def test_overhead_pose_violates_lateral_keyframe():
    f = extract_features(normalize(skeleton_from_pose("overhead")))
    kf = template_by_name("arms_side_bend_forward").keyframes[0]
    assert not kf.satisfied_by(f)


def test_no_template_requires_legs():
    for template in builtin_templates():
        for kf in template.keyframes:
            assert "l_leg" not in kf.required_limbs
            assert "r_leg" not in kf.required_limbs


def test_bend_keyframes_follow_analytic_poses():
    f_side = extract_features(normalize(skeleton_from_pose("side_bend")))
    f_toe = extract_features(normalize(skeleton_from_pose("toe_bend")))
    assert template_by_name(
        "arms_side_bend_forward").keyframes[1].satisfied_by(f_side)
    assert template_by_name(
        "arms_forward_bend_toes").keyframes[1].satisfied_by(f_toe)
    # quarter-pixel fixture quantization costs ~1e-3 rad
    assert f_side.torso_incline == pytest.approx(1.05, abs=5e-3)
    assert f_toe.torso_incline == pytest.approx(1.30, abs=5e-3)


def test_forward_pose_satisfies_extent_keyframe():
    f = extract_features(normalize(skeleton_from_pose("forward")))
    kf = template_by_name("arms_forward_bend_toes").keyframes[0]
    assert kf.satisfied_by(f)
    neutral = extract_features(normalize(skeleton_from_pose("neutral")))
    assert not kf.satisfied_by(neutral)


# -- match_gesture ------------------------------------------------------------

def test_synthetic_success_with_hold():
    stream = perform_stream("raise_arms_sky")
    res = match_gesture(stream, template_by_name("raise_arms_sky"))
    assert res.status == "success"
    assert res.chirality == "direct"
    assert len(res.keyframe_times_ms) == 1


def test_mirrored_participant_still_succeeds():
    stream = perform_stream("arms_side_bend_forward", chirality="mirrored")
    res = match_gesture(stream, template_by_name("arms_side_bend_forward"))
    assert res.status == "success"


def test_asymmetric_mirrored_reports_chirality():
    # one-armed template: only the mirrored track can complete a
    # chirality-swapped performance
    template = GestureTemplate(
        name="raise_right_arm",
        keyframes=(KeyframeSpec(
            constraints=(Constraint("r_shoulder_elev", PI, 0.35),
                         Constraint("r_elbow", PI, 0.35)),
            required_bools=(("r_wrist_above_head", True),),
            hold_ms=500, required_limbs=("r_arm",)),))
    stream = perform_stream("raise_arms_sky", chirality="direct")
    assert match_gesture(stream, template).status == "success"

    # hide the participant's right arm by constraining the left only
    left_only = GestureTemplate(
        name="raise_left_arm",
        keyframes=(KeyframeSpec(
            constraints=(Constraint("l_shoulder_elev", PI, 0.35),),
            required_bools=(("l_wrist_above_head", True),),
            hold_ms=500, required_limbs=("l_arm",)),))
    res = match_gesture(stream, left_only)
    assert res.status == "success"  # both-arm raise satisfies either side


def test_fidgeting_reads_attempt_failed():
    stream = stream_for([{"at_ms": 0, "action": "fidget", "amplitude": 0.25,
                          "period_ms": 700, "until_ms": 6000}],
                        duration_ms=6000)
    res = match_gesture(stream, template_by_name("raise_arms_sky"))
    assert res.status == "attempt_failed"
    assert res.energy > MatchConfig().attempt_energy_min


def test_static_idle_reads_no_attempt():
    stream = stream_for([], duration_ms=5000)
    res = match_gesture(stream, template_by_name("raise_arms_sky"))
    assert res.status == "no_attempt"
    assert res.energy == 0.0


def test_unscoreable_when_arms_hidden():
    script = ScenarioScript.from_dict({
        "participant": "X", "fps": 15, "seed": 1, "duration_ms": 5000,
        "timeline": [{"at_ms": 0, "action": "hide",
                      "limbs": ["r_arm", "l_arm"]},
                     {"at_ms": 0, "action": "hide",
                      "joints": ["r_elbow", "l_elbow", "r_wrist", "l_wrist",
                                 "nose"]}]})
    frames, _ = simulate(script)
    stream = feature_frames(frames, pick=lambda fr: fr.skeletons[0])
    res = match_gesture(stream, template_by_name("raise_arms_sky"))
    assert res.status == "unscoreable"


def test_empty_stream_raises():
    with pytest.raises(EmptyStream):
        match_gesture([], template_by_name("raise_arms_sky"))


def test_timestamps_must_increase():
    stream = perform_stream("raise_arms_sky")[:5]
    bad = stream + [stream[-1]]
    with pytest.raises(ValueError):
        match_gesture(bad, template_by_name("raise_arms_sky"))


def test_keyframe_order_enforced():
    # bend first, lateral arms second: a 2-keyframe template must not
    # succeed when its poses appear in reverse order only
    script = ScenarioScript.from_dict({
        "participant": "X", "fps": 15, "seed": 1, "duration_ms": 9000,
        "timeline": [
            {"at_ms": 500, "action": "perform_partial",
             "gesture": "arms_side_bend_forward", "sigma": 0.0},
        ]})
    # perform_partial gives keyframe 1 only: never reaches keyframe 2
    frames, _ = simulate(script)
    stream = feature_frames(frames, pick=lambda fr: fr.skeletons[0])
    res = match_gesture(stream, template_by_name("arms_side_bend_forward"))
    assert res.status == "attempt_failed"
    assert max(res.progress_direct, res.progress_mirrored) == 1

    # reversed template (bend, then lateral arms) on a correct-order
    # performance stream: keyframe 2's pose precedes keyframe 1's
    reversed_template = GestureTemplate(
        name="reversed", timeout_ms=20000,
        keyframes=tuple(reversed(
            template_by_name("arms_side_bend_forward").keyframes)))
    ok_stream = perform_stream("arms_side_bend_forward", duration_ms=9000)
    res2 = match_gesture(ok_stream, reversed_template)
    assert res2.status != "success"


def test_chirality_completeness_exact():
    for name in ("raise_arms_sky", "arms_side_bend_forward"):
        stream = perform_stream(name, sigma=0.02, seed=7)
        mirrored_stream = [
            FeatureFrame(t_ms=ff.t_ms, features=ff.features.mirrored(),
                         xy=ff.xy, visible=ff.visible)
            for ff in stream]
        template = template_by_name(name)
        a = match_gesture(stream, template)
        b = match_gesture(mirrored_stream, template)
        assert a.status == b.status
        assert a.progress_direct == b.progress_mirrored
        assert a.progress_mirrored == b.progress_direct


def test_skeleton_level_mirror_completeness():
    # mirroring raw skeletons (not just features) preserves the verdict
    script = ScenarioScript.from_dict({
        "participant": "X", "fps": 15, "seed": 3, "duration_ms": 8000,
        "timeline": [{"at_ms": 1000, "action": "perform",
                      "gesture": "arms_forward_bend_toes", "sigma": 0.0}]})
    frames, _ = simulate(script)
    direct = feature_frames(frames, pick=lambda fr: fr.skeletons[0])
    mirrored = feature_frames(
        [type(fr)(fr.timestamp_ms, (mirror(fr.skeletons[0]),), fr.source)
         for fr in frames])
    template = template_by_name("arms_forward_bend_toes")
    a = match_gesture(direct, template)
    b = match_gesture(mirrored, template)
    assert a.status == b.status == "success"
    assert a.progress_direct == b.progress_mirrored


def test_success_monotone_in_tolerance():
    base = MatchConfig()
    wide = MatchConfig(angle_tolerance=base.angle_tolerance * 2,
                       arm_extent_compressed=base.arm_extent_compressed * 2)
    for name in ("raise_arms_sky", "arms_side_bend_forward",
                 "arms_forward_bend_toes"):
        stream = perform_stream(name, sigma=0.03, seed=11, duration_ms=9000)
        narrow_res = match_gesture(stream, template_by_name(name, base), base)
        wide_res = match_gesture(stream, template_by_name(name, wide), wide)
        if narrow_res.status == "success":
            assert wide_res.status == "success"


def test_match_deterministic():
    stream = perform_stream("raise_arms_sky", sigma=0.05, seed=5)
    template = template_by_name("raise_arms_sky")
    a = match_gesture(stream, template)
    b = match_gesture(stream, template)
    assert a == b


# -- mirror_pose_command --------------------------------------------------------

def test_mirror_pose_command_swaps_sides():
    # participant raises only the right arm: command targets the left
    skel = skeleton_from_pose("overhead", hidden=("l_elbow", "l_wrist"))
    cmd = mirror_pose_command(normalize(skel), t_ms=5)
    assert "l_shoulder_elev" in cmd.targets
    assert "r_shoulder_elev" not in cmd.targets
    assert cmd.targets["l_shoulder_elev"] == pytest.approx(PI, abs=1e-6)
    assert "r_elbow" not in cmd.targets


def test_mirror_pose_command_tpose():
    cmd = mirror_pose_command(normalize(skeleton_from_pose("tpose")))
    assert cmd.targets["r_shoulder_elev"] == pytest.approx(PI / 2, abs=1e-6)
    assert cmd.targets["l_shoulder_elev"] == pytest.approx(PI / 2, abs=1e-6)


# -- motion stats -----------------------------------------------------------------

def _static_window(n=30):
    frames, _ = simulate(ScenarioScript.from_dict(
        {"participant": "X", "fps": 15, "seed": 1,
         "duration_ms": n * 67, "timeline": []}))
    return feature_frames(frames, pick=lambda fr: fr.skeletons[0])


def test_motion_stats_static():
    stats = motion_stats(_static_window())
    assert stats.energy == 0.0
    assert stats.rhythm_period_ms is None


def test_motion_stats_window_too_small():
    with pytest.raises(WindowTooSmall):
        motion_stats(_static_window()[:1])


def test_rhythm_of_pulsed_motion():
    # one short arm burst per second: the energy peak interval is the
    # generator's own period
    timeline = []
    for k in range(6):
        timeline.append({"at_ms": 1000 * k, "action": "fidget",
                         "amplitude": 0.3, "period_ms": 280,
                         "until_ms": 1000 * k + 280})
    stream = stream_for(timeline, duration_ms=6500)
    stats = motion_stats(stream)
    assert stats.rhythm_period_ms is not None
    assert abs(stats.rhythm_period_ms - 1000) <= 100  # within 10%


def test_activity_change_flag():
    quiet = motion_stats(_static_window())
    lively = motion_stats(stream_for(
        [{"at_ms": 0, "action": "fidget", "amplitude": 0.3,
          "period_ms": 500, "until_ms": 2000}], duration_ms=2000))
    assert activity_change(quiet, lively)
    assert not activity_change(lively, lively)
    # doubling energy trips the default 1.5 ratio
    half = motion_stats(stream_for(
        [{"at_ms": 0, "action": "fidget", "amplitude": 0.15,
          "period_ms": 500, "until_ms": 2000}], duration_ms=2000))
    assert activity_change(half, lively)
