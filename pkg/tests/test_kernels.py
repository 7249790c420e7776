"""Numba and numpy kernel backends must agree."""

import numpy as np

from imigame.kernels import numba_backend, numpy_backend

from conftest import random_skeletons


def _batch(rng, n=400):
    skels = random_skeletons(rng, n)
    return np.stack([s.data for s in skels])


def test_normalize_batch_agreement(rng):
    raw = _batch(rng)
    xy_a, vis_a, src_a, ok_a = numpy_backend.normalize_batch(raw, 0.1)
    xy_b, vis_b, src_b, ok_b = numba_backend.normalize_batch(raw, 0.1)
    assert (ok_a == ok_b).all()
    assert (src_a == src_b).all()
    assert (vis_a == vis_b).all()
    np.testing.assert_allclose(xy_b, xy_a, atol=1e-12)


def test_features_batch_agreement(rng):
    raw = _batch(rng)
    xy, vis, _src, ok = numpy_backend.normalize_batch(raw, 0.1)
    va, ka = numpy_backend.features_batch(xy, vis)
    vb, kb = numba_backend.features_batch(xy, vis)
    assert (ka == kb).all()
    np.testing.assert_allclose(vb, va, atol=1e-12)


def test_displacement_agreement(rng):
    raw = _batch(rng, 100)
    xy, vis, _src, _ok = numpy_backend.normalize_batch(raw, 0.1)
    da = numpy_backend.displacement_series(xy, vis)
    db = numba_backend.displacement_series(xy, vis)
    np.testing.assert_allclose(db, da, atol=1e-12)


def test_displacement_static_is_zero():
    xy = np.zeros((5, 18, 2))
    vis = np.ones((5, 18), dtype=bool)
    assert (numpy_backend.displacement_series(xy, vis) == 0).all()
    assert (numba_backend.displacement_series(xy, vis) == 0).all()
