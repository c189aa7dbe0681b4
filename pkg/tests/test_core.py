import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from lolreg.core import (DesignMatrix, GroundTruth, ZeroColumnError, coherence, coherence_report,
                         leader_capacity, normalize_columns, rip_bounds_check)
from oracles import naive_coherence

S2 = math.sqrt(2)


def test_normalize_already_normalized():
    d = normalize_columns([[1, 1], [1, -1]])
    np.testing.assert_array_equal(d.values, [[1, 1], [1, -1]])
    assert d.normalized


def test_normalize_rescales_single_column():
    d = normalize_columns([[2.0], [0.0]])
    np.testing.assert_allclose(d.values[:, 0], [S2, 0.0], rtol=1e-15)
    np.testing.assert_allclose(d.scale, [S2 / 2])
    assert np.mean(d.values[:, 0] ** 2) == pytest.approx(1.0, abs=1e-12)


def test_normalize_zero_column_names_index():
    with pytest.raises(ZeroColumnError) as exc:
        normalize_columns([[1.0, 0.0, 2.0], [3.0, 0.0, 1.0]])
    assert exc.value.column == 1


def test_scale_maps_back_to_raw_columns(rng):
    raw = rng.standard_normal((30, 4)) * [1, 10, 0.1, 3]
    d = normalize_columns(raw)
    coef = rng.standard_normal(4)
    np.testing.assert_allclose(raw @ d.to_original_units(coef), d.values @ coef, rtol=1e-12)


def test_design_rejects_non_finite():
    with pytest.raises(ValueError):
        DesignMatrix(np.array([[1.0, np.nan]]))


finite_matrices = st.integers(1, 8).flatmap(
    lambda n: st.integers(1, 6).flatmap(
        lambda p: arrays(np.float64, (n, p), elements=st.floats(-1e3, 1e3, allow_nan=False))))


@given(finite_matrices)
def test_normalization_invariant_and_idempotent(m):
    if np.any(np.all(m == 0, axis=0)):
        with pytest.raises(ZeroColumnError):
            normalize_columns(m)
        return
    d = normalize_columns(m)
    np.testing.assert_allclose(np.mean(d.values ** 2, axis=0), 1.0, atol=1e-9)
    d2 = normalize_columns(d)
    np.testing.assert_allclose(d2.values, d.values, rtol=0, atol=1e-12)


def test_coherence_orthogonal_is_zero():
    assert coherence(normalize_columns([[1, 1], [1, -1]])) == 0.0


def test_coherence_hand_example():
    d = normalize_columns(np.array([[1.0, S2], [1.0, 0.0]]))
    assert coherence(d) == pytest.approx(S2 / 2, abs=1e-15)


def test_coherence_needs_two_columns():
    with pytest.raises(ValueError):
        coherence(normalize_columns([[1.0], [2.0]]))


def test_coherence_requires_normalized():
    with pytest.raises(ValueError):
        coherence(DesignMatrix(np.eye(3)))


@pytest.mark.parametrize("p", [2, 3, 7, 20, 50])
def test_blocked_coherence_matches_double_loop(rng, p):
    for _ in range(5):
        d = normalize_columns(rng.standard_normal((int(rng.integers(2, 40)), p)))
        for block in (1, 3, 16, 512):
            assert abs(coherence(d, block=block) - naive_coherence(d.values)) <= 1e-12


@given(arrays(np.float64, st.tuples(st.integers(1, 10), st.integers(2, 12)),
              elements=st.floats(-10, 10, allow_nan=False)))
def test_coherence_bounded_by_one(m):
    if np.any(np.sum(m * m, axis=0) < 1e-100):
        return
    tau = coherence(normalize_columns(m))
    assert 0 <= tau <= 1 + 1e-9


def test_leader_capacity_examples():
    assert leader_capacity(0.05, 0.5, 1000) == 10
    assert leader_capacity(0.0, 0.5, 1000) == 1000
    assert leader_capacity(0.30, 0.5, 1000) == 1
    assert leader_capacity(S2 / 2, 0.5, 2) == 0


@pytest.mark.parametrize("nu", [0.0, 1.0, -0.1, 1.5])
def test_leader_capacity_rejects_nu(nu):
    with pytest.raises(ValueError):
        leader_capacity(0.1, nu, 10)


def test_coherence_report_invariant(gaussian_design):
    rep = coherence_report(gaussian_design(100, 40), nu=0.5)
    assert rep.capacity == math.floor(0.5 / rep.tau)


def test_rip_orthogonal_identity():
    d = normalize_columns(np.linalg.qr(np.random.default_rng(0).standard_normal((20, 6)))[0])
    lo, hi, ok = rip_bounds_check(d, [0, 2, 5], 0.5)
    assert lo == pytest.approx(1.0, abs=1e-12) and hi == pytest.approx(1.0, abs=1e-12) and ok


def test_rip_hand_example_fails():
    d = normalize_columns(np.array([[1.0, S2], [1.0, 0.0]]))
    lo, hi, ok = rip_bounds_check(d, [0, 1], 0.5)
    assert lo == pytest.approx(1 - S2 / 2, abs=1e-12)
    assert hi == pytest.approx(1 + S2 / 2, abs=1e-12)
    assert not ok


@pytest.mark.parametrize("idx,exc", [([0, 0], ValueError), ([5], IndexError), ([-1], IndexError)])
def test_rip_rejects_bad_indices(idx, exc):
    with pytest.raises(exc):
        rip_bounds_check(normalize_columns(np.eye(3)), idx, 0.5)


def test_gershgorin_subsets_pass(rng):
    # n large relative to p keeps the coherence low enough for a capacity above 1
    for _ in range(5):
        d = normalize_columns(rng.standard_normal((3000, 150)))
        tau = coherence(d)
        cap = leader_capacity(tau, 0.5, d.p)
        assert cap >= 2
        for _ in range(100):
            size = int(rng.integers(1, cap + 1))
            idx = rng.choice(d.p, size, replace=False)
            lo, hi, ok = rip_bounds_check(d, idx, 0.5)
            assert ok, (tau, size, lo, hi)
            assert 1 - (size - 1) * tau - 1e-12 <= lo <= hi <= 1 + (size - 1) * tau + 1e-12


def test_ground_truth_support_size():
    t = GroundTruth(alpha=np.array([0.0, 1.5, 0.0, -2.0]))
    assert t.support_size == 2
    np.testing.assert_array_equal(t.u_or_zeros(3), 0.0)
    with pytest.raises(ValueError):
        GroundTruth(alpha=np.zeros(2), sigma=-1.0)


def test_subnormal_column_normalizes_with_infinite_scale():
    d = normalize_columns([[2.2e-311, 1.0], [0.0, 2.0]])
    np.testing.assert_allclose(d.values[:, 0], [S2, 0.0], rtol=1e-15)
    assert math.isinf(d.scale[0]) and math.isfinite(d.scale[1])
