"""Pure-numpy geometry kernels, vectorized over frames.

Reference implementation for the numba backend: both must implement the
exact same semantics (see defs module for conventions). Every function
takes and returns plain ndarrays so the two backends are drop-in
equivalents.
"""

import numpy as np

from .defs import (
    EPS_BONE, L_ELBOW, L_HIP, L_SHOULDER, L_WRIST, N_FEATURES, NECK, NOSE,
    R_ELBOW, R_HIP, R_SHOULDER, R_WRIST, SCALE_HIPS, SCALE_NONE,
    SCALE_SHOULDERS,
    F_L_ARM_EXTENT, F_L_ELBOW, F_L_SHOULDER_ELEV, F_L_WRIST_ABOVE_HEAD,
    F_R_ARM_EXTENT, F_R_ELBOW, F_R_SHOULDER_ELEV, F_R_WRIST_ABOVE_HEAD,
    F_TORSO_INCLINE, F_TORSO_LEN,
)


def _norm(v):
    return np.sqrt(v[..., 0] * v[..., 0] + v[..., 1] * v[..., 1])


def _interior_angle(u, v, ok):
    """Angle between vector batches u, v in [0, pi]; 0.0 where not ok."""
    nu = _norm(u)
    nv = _norm(v)
    ok = ok & (nu > EPS_BONE) & (nv > EPS_BONE)
    denom = np.where(ok, nu * nv, 1.0)
    cos = (u[..., 0] * v[..., 0] + u[..., 1] * v[..., 1]) / denom
    theta = np.arccos(np.clip(cos, -1.0, 1.0))
    return np.where(ok, theta, 0.0), ok


def normalize_batch(raw, conf_min):
    """Normalize (N, 18, 3) raw skeletons to neck-origin, torso-unit scale.

    Returns (xy, visible, scale_source, ok):
      xy           (N, 18, 2) normalized coordinates, 0 where invisible
      visible      (N, 18)    confidence >= conf_min
      scale_source (N,)       SCALE_HIPS / SCALE_SHOULDERS / SCALE_NONE
      ok           (N,)       False where neck invisible or no scale exists
    """
    raw = np.asarray(raw, dtype=np.float64)
    xy = raw[:, :, :2]
    visible = raw[:, :, 2] >= conf_min

    neck_vis = visible[:, NECK]
    r_hip_vis = visible[:, R_HIP]
    l_hip_vis = visible[:, L_HIP]
    have_hip = r_hip_vis | l_hip_vis

    both = r_hip_vis & l_hip_vis
    midhip = np.where(
        both[:, None], (xy[:, R_HIP] + xy[:, L_HIP]) * 0.5,
        np.where(r_hip_vis[:, None], xy[:, R_HIP], xy[:, L_HIP]))

    neck = xy[:, NECK]
    torso_d = _norm(midhip - neck)
    hip_ok = neck_vis & have_hip & (torso_d > EPS_BONE)

    sh_d = _norm(xy[:, R_SHOULDER] - xy[:, L_SHOULDER])
    sh_ok = (neck_vis & visible[:, R_SHOULDER] & visible[:, L_SHOULDER]
             & (sh_d > EPS_BONE) & ~hip_ok)

    ok = hip_ok | sh_ok
    scale = np.where(hip_ok, torso_d, np.where(sh_ok, 2.0 * sh_d, 1.0))
    source = np.where(hip_ok, SCALE_HIPS,
                      np.where(sh_ok, SCALE_SHOULDERS, SCALE_NONE)).astype(np.int8)

    out = (xy - neck[:, None, :]) / scale[:, None, None]
    out = np.where((visible & ok[:, None])[:, :, None], out, 0.0)
    return out, visible, source, ok


def features_batch(xy, visible):
    """Angle/boolean/length features for (N, 18, 2) normalized skeletons.

    Returns (values, valid), both (N, N_FEATURES). Invalid slots hold 0.0.
    Degenerate zero-length bones yield invalid flags, never NaN.
    """
    xy = np.asarray(xy, dtype=np.float64)
    visible = np.asarray(visible, dtype=bool)
    n = xy.shape[0]
    values = np.zeros((n, N_FEATURES))
    valid = np.zeros((n, N_FEATURES), dtype=bool)

    neck = xy[:, NECK]
    neck_vis = visible[:, NECK]
    r_hip_vis = visible[:, R_HIP]
    l_hip_vis = visible[:, L_HIP]
    have_hip = r_hip_vis | l_hip_vis
    both = r_hip_vis & l_hip_vis
    midhip = np.where(
        both[:, None], (xy[:, R_HIP] + xy[:, L_HIP]) * 0.5,
        np.where(r_hip_vis[:, None], xy[:, R_HIP], xy[:, L_HIP]))
    torso_vec = midhip - neck
    torso_d = _norm(torso_vec)
    axis_ok = neck_vis & have_hip & (torso_d > EPS_BONE)

    down = np.zeros_like(torso_vec)
    down[:, 1] = 1.0
    ref = np.where(axis_ok[:, None], torso_vec, down)

    for f_ang, sh, el, wr in ((F_R_ELBOW, R_SHOULDER, R_ELBOW, R_WRIST),
                              (F_L_ELBOW, L_SHOULDER, L_ELBOW, L_WRIST)):
        j_ok = visible[:, sh] & visible[:, el] & visible[:, wr]
        theta, ok = _interior_angle(xy[:, sh] - xy[:, el],
                                    xy[:, wr] - xy[:, el], j_ok)
        values[:, f_ang] = theta
        valid[:, f_ang] = ok

    for f_el, sh, el in ((F_R_SHOULDER_ELEV, R_SHOULDER, R_ELBOW),
                         (F_L_SHOULDER_ELEV, L_SHOULDER, L_ELBOW)):
        j_ok = visible[:, sh] & visible[:, el]
        theta, ok = _interior_angle(xy[:, el] - xy[:, sh], ref, j_ok)
        values[:, f_el] = theta
        valid[:, f_el] = ok

    theta, ok = _interior_angle(torso_vec, down, axis_ok)
    values[:, F_TORSO_INCLINE] = theta
    valid[:, F_TORSO_INCLINE] = ok

    for f_b, wr in ((F_R_WRIST_ABOVE_HEAD, R_WRIST),
                    (F_L_WRIST_ABOVE_HEAD, L_WRIST)):
        ok = visible[:, wr] & visible[:, NOSE]
        values[:, f_b] = np.where(ok & (xy[:, wr, 1] < xy[:, NOSE, 1]), 1.0, 0.0)
        valid[:, f_b] = ok

    for f_x, sh, wr in ((F_R_ARM_EXTENT, R_SHOULDER, R_WRIST),
                        (F_L_ARM_EXTENT, L_SHOULDER, L_WRIST)):
        ok = visible[:, sh] & visible[:, wr]
        values[:, f_x] = np.where(ok, _norm(xy[:, wr] - xy[:, sh]), 0.0)
        valid[:, f_x] = ok

    values[:, F_TORSO_LEN] = np.where(axis_ok, torso_d, 0.0)
    valid[:, F_TORSO_LEN] = axis_ok
    return values, valid


def displacement_series(xy, visible):
    """Mean per-joint L1 displacement between consecutive frames.

    Joints are counted only when visible in both frames of a pair; a pair
    with no shared joints contributes 0. Returns an (N-1,) array.
    """
    xy = np.asarray(xy, dtype=np.float64)
    visible = np.asarray(visible, dtype=bool)
    shared = visible[1:] & visible[:-1]
    l1 = np.abs(xy[1:] - xy[:-1]).sum(axis=2)
    cnt = shared.sum(axis=1)
    tot = (l1 * shared).sum(axis=1)
    return np.where(cnt > 0, tot / np.maximum(cnt, 1), 0.0)
