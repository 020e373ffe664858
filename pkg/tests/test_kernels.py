"""The numba and numpy kernel paths must agree."""

import numpy as np
import pytest

from windfeas import _kernels as K


def _random_with_nans(rng, n, frac=0.1):
    v = rng.uniform(0, 3000, n)
    v[rng.random(n) < frac] = np.nan
    return v


@pytest.mark.skipif(not K.HAVE_NUMBA, reason="numba unavailable or disabled")
@pytest.mark.parametrize("width,stride", [(21, 1), (21, 21), (7, 3), (1, 1),
                                          (60, 13)])
def test_paths_agree(width, stride):
    rng = np.random.default_rng(42)
    for _ in range(20):
        v = _random_with_nans(rng, int(rng.integers(width, 500)))
        m_np, s_np, ok_np = K.sliding_mean_std_np(v, width, stride)
        m_nb, s_nb, ok_nb = K.sliding_mean_std_nb(v, width, stride)
        np.testing.assert_array_equal(ok_np, ok_nb)
        np.testing.assert_array_equal(np.isnan(m_np), np.isnan(m_nb))
        np.testing.assert_allclose(m_nb[ok_np], m_np[ok_np], rtol=1e-12)
        np.testing.assert_allclose(s_nb[ok_np], s_np[ok_np], rtol=1e-12,
                                   atol=1e-12)
        assert np.all(np.isnan(m_nb[~ok_nb]))


@pytest.mark.parametrize("fn", [K.sliding_mean_std_np, K.sliding_mean_std])
def test_constant_window_std_exactly_zero(fn):
    v = np.full(100, 3300.0)
    means, stds, valid = fn(v, 21, 1)
    assert valid.all()
    np.testing.assert_array_equal(means, 3300.0)
    assert np.all(stds == 0.0)


@pytest.mark.parametrize("fn", [K.sliding_mean_std_np, K.sliding_mean_std])
def test_short_series_yields_empty(fn):
    means, stds, valid = fn(np.arange(5.0), 21, 1)
    assert means.size == stds.size == valid.size == 0


@pytest.mark.parametrize("fn", [K.sliding_mean_std_np, K.sliding_mean_std])
def test_window_count(fn):
    means, _, _ = fn(np.arange(1440.0), 21, 1)
    assert means.size == 1420
    means, _, _ = fn(np.arange(1440.0), 21, 21)
    assert means.size == 68


def test_bad_args_raise():
    with pytest.raises(ValueError):
        K.sliding_mean_std_np(np.arange(5.0), 0, 1)
    with pytest.raises(ValueError):
        K.sliding_mean_std(np.arange(5.0), 3, 0)


@pytest.mark.skipif(not K.HAVE_NUMBA, reason="numba unavailable or disabled")
def test_impute_paths_identical():
    rng = np.random.default_rng(3)
    v = rng.uniform(0, 10, 400)
    v[rng.choice(400, 30, replace=False)] = np.nan
    targets = np.flatnonzero(np.isnan(v))
    out_py = K.impute_cascade_py(v, targets)
    out_nb = K.impute_cascade_nb(v, targets)
    np.testing.assert_array_equal(out_py, out_nb)
    assert np.isnan(v).sum() == 30  # input untouched


def test_impute_empty_targets_is_identity():
    v = np.array([1.0, np.nan, 3.0])
    out = K.impute_cascade(v, np.empty(0, dtype=np.int64))
    np.testing.assert_array_equal(np.isnan(out), np.isnan(v))
