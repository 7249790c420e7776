"""Numba-compiled geometry kernels.

Same contracts as numpy_backend; plain per-frame loops that numba turns
into tight machine code. Keep the arithmetic order identical to the
numpy backend so results agree to float tolerance.
"""

import numpy as np
from numba import njit

from .defs import (
    EPS_BONE, N_FEATURES, SCALE_HIPS, SCALE_NONE, SCALE_SHOULDERS,
)

# Joint / feature index constants inlined as literals for numba:
# 0 nose, 1 neck, 2/3/4 right arm, 5/6/7 left arm, 8/11 hips.
_NOSE, _NECK = 0, 1
_RSH, _REL, _RWR = 2, 3, 4
_LSH, _LEL, _LWR = 5, 6, 7
_RHIP, _LHIP = 8, 11


@njit(cache=True)
def _angle(ux, uy, vx, vy):
    """Interior angle of (ux,uy),(vx,vy); returns (theta, ok)."""
    nu = np.sqrt(ux * ux + uy * uy)
    nv = np.sqrt(vx * vx + vy * vy)
    if nu <= EPS_BONE or nv <= EPS_BONE:
        return 0.0, False
    c = (ux * vx + uy * vy) / (nu * nv)
    if c > 1.0:
        c = 1.0
    elif c < -1.0:
        c = -1.0
    return np.arccos(c), True


@njit(cache=True)
def normalize_batch(raw, conf_min):
    n = raw.shape[0]
    xy = np.zeros((n, 18, 2))
    visible = np.zeros((n, 18), dtype=np.bool_)
    source = np.zeros(n, dtype=np.int8)
    ok = np.zeros(n, dtype=np.bool_)

    for i in range(n):
        for j in range(18):
            visible[i, j] = raw[i, j, 2] >= conf_min
        if not visible[i, _NECK]:
            source[i] = SCALE_NONE
            continue
        nx = raw[i, _NECK, 0]
        ny = raw[i, _NECK, 1]

        r_hip = visible[i, _RHIP]
        l_hip = visible[i, _LHIP]
        scale = 0.0
        src = SCALE_NONE
        if r_hip or l_hip:
            if r_hip and l_hip:
                mx = (raw[i, _RHIP, 0] + raw[i, _LHIP, 0]) * 0.5
                my = (raw[i, _RHIP, 1] + raw[i, _LHIP, 1]) * 0.5
            elif r_hip:
                mx = raw[i, _RHIP, 0]
                my = raw[i, _RHIP, 1]
            else:
                mx = raw[i, _LHIP, 0]
                my = raw[i, _LHIP, 1]
            dx = mx - nx
            dy = my - ny
            d = np.sqrt(dx * dx + dy * dy)
            if d > EPS_BONE:
                scale = d
                src = SCALE_HIPS
        if src == SCALE_NONE and visible[i, _RSH] and visible[i, _LSH]:
            dx = raw[i, _RSH, 0] - raw[i, _LSH, 0]
            dy = raw[i, _RSH, 1] - raw[i, _LSH, 1]
            d = np.sqrt(dx * dx + dy * dy)
            if d > EPS_BONE:
                scale = 2.0 * d
                src = SCALE_SHOULDERS
        if src == SCALE_NONE:
            continue
        source[i] = src
        ok[i] = True
        for j in range(18):
            if visible[i, j]:
                xy[i, j, 0] = (raw[i, j, 0] - nx) / scale
                xy[i, j, 1] = (raw[i, j, 1] - ny) / scale
    return xy, visible, source, ok


@njit(cache=True)
def features_batch(xy, visible):
    n = xy.shape[0]
    values = np.zeros((n, N_FEATURES))
    valid = np.zeros((n, N_FEATURES), dtype=np.bool_)

    for i in range(n):
        neck_vis = visible[i, _NECK]
        r_hip = visible[i, _RHIP]
        l_hip = visible[i, _LHIP]
        tvx = 0.0
        tvy = 0.0
        axis_ok = False
        if neck_vis and (r_hip or l_hip):
            if r_hip and l_hip:
                mx = (xy[i, _RHIP, 0] + xy[i, _LHIP, 0]) * 0.5
                my = (xy[i, _RHIP, 1] + xy[i, _LHIP, 1]) * 0.5
            elif r_hip:
                mx = xy[i, _RHIP, 0]
                my = xy[i, _RHIP, 1]
            else:
                mx = xy[i, _LHIP, 0]
                my = xy[i, _LHIP, 1]
            tvx = mx - xy[i, _NECK, 0]
            tvy = my - xy[i, _NECK, 1]
            if np.sqrt(tvx * tvx + tvy * tvy) > EPS_BONE:
                axis_ok = True
        if axis_ok:
            refx, refy = tvx, tvy
        else:
            refx, refy = 0.0, 1.0

        # elbows: slot 0 right, slot 1 left
        for k in range(2):
            sh = _RSH + 3 * k
            el = _REL + 3 * k
            wr = _RWR + 3 * k
            if visible[i, sh] and visible[i, el] and visible[i, wr]:
                th, a_ok = _angle(xy[i, sh, 0] - xy[i, el, 0],
                                  xy[i, sh, 1] - xy[i, el, 1],
                                  xy[i, wr, 0] - xy[i, el, 0],
                                  xy[i, wr, 1] - xy[i, el, 1])
                values[i, k] = th
                valid[i, k] = a_ok

        # shoulder elevations: slot 2 right, slot 3 left
        for k in range(2):
            sh = _RSH + 3 * k
            el = _REL + 3 * k
            if visible[i, sh] and visible[i, el]:
                th, a_ok = _angle(xy[i, el, 0] - xy[i, sh, 0],
                                  xy[i, el, 1] - xy[i, sh, 1],
                                  refx, refy)
                values[i, 2 + k] = th
                valid[i, 2 + k] = a_ok

        # torso incline: slot 4
        if axis_ok:
            th, a_ok = _angle(tvx, tvy, 0.0, 1.0)
            values[i, 4] = th
            valid[i, 4] = a_ok

        # wrist above head booleans: slots 5, 6
        for k in range(2):
            wr = _RWR + 3 * k
            if visible[i, wr] and visible[i, _NOSE]:
                valid[i, 5 + k] = True
                if xy[i, wr, 1] < xy[i, _NOSE, 1]:
                    values[i, 5 + k] = 1.0

        # arm extents: slots 7, 8
        for k in range(2):
            sh = _RSH + 3 * k
            wr = _RWR + 3 * k
            if visible[i, sh] and visible[i, wr]:
                dx = xy[i, wr, 0] - xy[i, sh, 0]
                dy = xy[i, wr, 1] - xy[i, sh, 1]
                values[i, 7 + k] = np.sqrt(dx * dx + dy * dy)
                valid[i, 7 + k] = True

        # torso length: slot 9
        if axis_ok:
            values[i, 9] = np.sqrt(tvx * tvx + tvy * tvy)
            valid[i, 9] = True
    return values, valid


@njit(cache=True)
def displacement_series(xy, visible):
    n = xy.shape[0]
    out = np.zeros(max(n - 1, 0))
    for i in range(1, n):
        tot = 0.0
        cnt = 0
        for j in range(18):
            if visible[i, j] and visible[i - 1, j]:
                tot += (abs(xy[i, j, 0] - xy[i - 1, j, 0])
                        + abs(xy[i, j, 1] - xy[i - 1, j, 1]))
                cnt += 1
        if cnt > 0:
            out[i - 1] = tot / cnt
    return out
