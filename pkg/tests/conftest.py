"""Shared fixtures: analytic pose skeletons and randomized generators.

Random skeleton coordinates are quantized to a quarter-pixel grid,
matching real detector output resolution and keeping reflection
arithmetic exact.
"""

import numpy as np
import pytest

from imigame.kernels import JOINT_NAMES, N_JOINTS
from imigame.model import Skeleton
from imigame.simulate import analytic_poses, pose_to_array

GRID = 0.25
_J = {name: i for i, name in enumerate(JOINT_NAMES)}


def skeleton_from_pose(pose_name: str, scale: float = 200.0,
                       offset=(640.0, 360.0), conf: float = 0.9,
                       hidden=()) -> Skeleton:
    """Analytic pose rendered to pixel coordinates on the quarter-px grid."""
    pose = analytic_poses()[pose_name]
    hidden_idx = frozenset(_J[name] for name in hidden)
    arr = pose_to_array(pose, hidden_idx)
    arr[:, 0] = np.round((arr[:, 0] * scale + offset[0]) / GRID) * GRID
    arr[:, 1] = np.round((arr[:, 1] * scale + offset[1]) / GRID) * GRID
    invisible = arr[:, 2] == 0.0
    arr[invisible, :2] = 0.0
    arr[~invisible, 2] = conf
    return Skeleton(arr)


def random_skeletons(rng: np.random.Generator, n: int,
                     p_invisible: float = 0.2) -> list:
    """Random quarter-px-grid skeletons; every one keeps >= 1 visible joint."""
    out = []
    for _ in range(n):
        xy = np.round(rng.uniform(0, 2000, size=(N_JOINTS, 2)) / GRID) * GRID
        conf = rng.uniform(0.2, 1.0, size=N_JOINTS)
        mask = rng.uniform(size=N_JOINTS) < p_invisible
        keep = rng.integers(N_JOINTS)
        mask[keep] = False
        conf[mask] = 0.0
        arr = np.column_stack([xy, conf])
        out.append(Skeleton(arr))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20250810)


@pytest.fixture
def neutral_skeleton():
    return skeleton_from_pose("neutral")


@pytest.fixture
def overhead_skeleton():
    return skeleton_from_pose("overhead")


@pytest.fixture
def tpose_skeleton():
    return skeleton_from_pose("tpose")
