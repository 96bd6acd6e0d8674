import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from robust_factorize.exceptions import ShapeError
from robust_factorize.weights import WeightScheme, compute_weights

E_INV = math.exp(-1.0)  # 0.36787944117144233

resid = arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)),
               elements=st.floats(-50, 50, allow_nan=False))


def weights_for(kind, r, **kw):
    # x - approx == r exactly
    return compute_weights(WeightScheme(kind, **kw), r, np.zeros_like(r))


def test_none_is_all_ones(rng):
    x, a = rng.random((3, 4)), rng.random((3, 4))
    assert np.array_equal(compute_weights("none", x, a), np.ones((3, 4)))


def test_cim_zero_residual_gives_one():
    x = np.array([[1.0, 2.0, 3.0]])
    approx = np.array([[1.0, 0.0, 3.0]])
    assert compute_weights("cim", x, approx)[0, 0] == 1.0


def test_cim_residual_at_sigma():
    # r = [1, -1]: population variance 1 = r^2 for both entries
    scheme = WeightScheme("cim", cim_sigma_source="residual")
    g = compute_weights(scheme, np.array([[2.0, 0.0]]), np.array([[1.0, 1.0]]))
    np.testing.assert_allclose(g, [[E_INV, E_INV]], rtol=1e-15)


def test_cim_data_sigma_source():
    x = np.array([[0.0, 2.0]])  # var(x) = 1
    approx = np.array([[1.0, 1.0]])
    g = compute_weights(WeightScheme("cim", cim_sigma_source="data"), x, approx)
    np.testing.assert_allclose(g, [[E_INV, E_INV]], rtol=1e-15)
    assert WeightScheme("cim").cim_sigma_source == "data"


def test_huber_values():
    # |r| = [1, 1, 2]: delta = 1
    g = weights_for("huber", np.array([[1.0, -1.0, 2.0]]))
    assert np.array_equal(g, [[1.0, 1.0, 0.5]])


def test_l1_and_l21():
    r = np.array([[3.0, 0.0], [-4.0, 1e-20]])
    np.testing.assert_allclose(weights_for("l1", r), [[1 / 3, 1e12], [1 / 4, 1e12]])
    np.testing.assert_allclose(weights_for("l21", r), [[0.2, 1e12], [0.2, 1e12]])


def test_degenerate_paths_are_finite():
    x = np.ones((3, 3))
    assert np.array_equal(compute_weights("cim", x, x), np.ones((3, 3)))
    residual = WeightScheme("cim", cim_sigma_source="residual")
    assert np.array_equal(compute_weights(residual, x, x), np.ones((3, 3)))
    assert np.array_equal(compute_weights("huber", x, x), np.ones((3, 3)))
    # delta = 0 but one large residual
    approx = x.copy()
    approx[0, 0] = 0.0
    g = compute_weights("huber", x, approx)
    assert np.all(np.isfinite(g)) and np.all(g > 0) and np.all(g <= 1)
    assert g[0, 0] < 1 and np.sum(g == 1.0) == 8


def test_shape_mismatch():
    with pytest.raises(ShapeError):
        compute_weights("cim", np.ones((2, 2)), np.ones((2, 3)))


def test_unknown_kind():
    with pytest.raises(ValueError):
        WeightScheme("l2")


@pytest.mark.parametrize("kind", ["cim", "huber"])
@given(r=resid)
def test_bounded_weights_in_unit_interval(kind, r):
    g = weights_for(kind, r)
    assert g.shape == r.shape
    assert np.all(g > 0) and np.all(g <= 1)


@pytest.mark.parametrize("kind", ["l1", "l21"])
@given(r=resid)
def test_irls_weights_positive_finite(kind, r):
    g = weights_for(kind, r)
    assert np.all(g > 0) and np.all(np.isfinite(g))


@pytest.mark.parametrize("kind", ["cim", "huber"])
@given(r=resid)
def test_monotone_in_residual_magnitude(kind, r):
    # with sigma^2 / delta fixed by the matrix, larger |r| never gets more weight
    g = weights_for(kind, r).ravel()
    a = np.abs(r).ravel()
    order = np.argsort(a, kind="stable")
    a, g = a[order], g[order]
    strictly = a[1:] > a[:-1]
    assert np.all(g[1:][strictly] <= g[:-1][strictly])


@given(r=resid, c=st.floats(0.01, 100))
def test_huber_scale_invariance(r, c):
    # the delta = 0 guard uses an absolute epsilon, so only delta > 0 scales
    assume(np.median(np.abs(r)) > 1e-6)
    np.testing.assert_allclose(weights_for("huber", r * c), weights_for("huber", r),
                               rtol=1e-12, atol=0)


@given(r=resid)
def test_l21_column_constant(r):
    g = weights_for("l21", r)
    assert np.all(g == g[0:1, :])


def test_deterministic(rng):
    x, a = rng.random((5, 4)), rng.random((5, 4))
    for kind in ("cim", "huber", "l1", "l21"):
        assert np.array_equal(compute_weights(kind, x, a), compute_weights(kind, x, a))
