import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lolreg.thresholding import (Adaptive, DegenerateSplitError, Fixed, Theorem, adaptive_split,
                                 adaptive_threshold, theorem_constants, theorem_thresholds)
from oracles import brute_force_split


def test_split_two_clusters():
    vals = [0.01, 0.02, 0.03, 0.90, 0.95]
    r = adaptive_split(vals)
    assert 0.03 < r.threshold < 0.90
    assert r.upper_count == 2 and r.lower_count == 3
    t, score, lo, hi = brute_force_split(vals)
    assert r.threshold == t and (r.lower_count, r.upper_count) == (lo, hi)
    assert r.between_class_variance == pytest.approx(score, rel=1e-12)


def test_split_only_cut():
    r = adaptive_split([0.0, 1.0])
    assert r.threshold == 0.5 and r.upper_count == 1


def test_split_degenerate():
    with pytest.raises(DegenerateSplitError, match="degenerate"):
        adaptive_split([0.5, 0.5, 0.5])


@pytest.mark.parametrize("vals", [[1.0], [], [-1.0, 2.0]])
def test_split_bad_input(vals):
    with pytest.raises(ValueError):
        adaptive_split(vals)


def test_split_tie_goes_to_smaller_upper_class():
    # both cuts score 1/3
    r = adaptive_split([0.0, 1.0, 1.0, 2.0])
    assert r.upper_count == 1 and r.threshold == 1.5


def test_adaptive_threshold_fallbacks():
    assert adaptive_threshold([0.9, 0.9]) == 0.0
    assert adaptive_threshold([0.3]) == 0.0
    assert adaptive_threshold([0.0, 1.0]) == 0.5


nonneg = st.lists(st.floats(0, 1e6, allow_nan=False, allow_infinity=False), min_size=2, max_size=60)


@given(nonneg)
def test_split_matches_brute_force(vals):
    ref = brute_force_split(vals)
    if ref is None:
        with pytest.raises(DegenerateSplitError):
            adaptive_split(vals)
        return
    r = adaptive_split(vals)
    assert (r.threshold, r.lower_count, r.upper_count) == (ref[0], ref[2], ref[3])
    assert r.lower_count + r.upper_count == len(vals) and r.upper_count >= 1
    assert sum(v >= r.threshold for v in vals) == r.upper_count


@given(nonneg, st.randoms())
def test_split_permutation_invariant(vals, rnd):
    if len(set(vals)) < 2:
        return
    shuffled = list(vals)
    rnd.shuffle(shuffled)
    assert adaptive_split(vals) == adaptive_split(shuffled)


@given(st.lists(st.floats(0.01, 100), min_size=2, max_size=40, unique=True),
       st.floats(0.01, 100))
def test_split_scales_with_values(vals, lam):
    r = adaptive_split(vals)
    rs = adaptive_split([lam * v for v in vals])
    assert rs.upper_count == r.upper_count
    assert rs.threshold == pytest.approx(lam * r.threshold, rel=1e-9)


def test_fixed_policy_validation():
    Fixed(1.0, 0.5)
    with pytest.raises(ValueError):
        Fixed(0.5, 1.0)
    with pytest.raises(ValueError):
        Fixed(1.0, -0.1)


def test_theorem_policy_validation():
    with pytest.raises(ValueError):
        Theorem(sigma=0.0, M=1.0)
    with pytest.raises(ValueError):
        Theorem(sigma=1.0, M=1.0, c0=-1.0)


def test_theorem_constants_example():
    t1, t2 = theorem_constants(Theorem(sigma=1.0, M=1.0, c0=0.0, c=1.0), nu=0.5)
    assert t1 == 64.0 and t2 == 6.0


def test_theorem_thresholds_example():
    l1, l2 = theorem_thresholds(250, 1000, Theorem(1.0, 1.0, 0.0, 1.0), nu=0.5, tau=0.0)
    assert l1 == l2 == pytest.approx(64 * math.sqrt(math.log(1000) / 250), rel=1e-14)
    assert l1 == pytest.approx(10.6385, abs=1e-4)


def test_theorem_coherence_term_dominates():
    l1, l2 = theorem_thresholds(250, 1000, Theorem(1.0, 1.0, 0.0, 1.0), nu=0.5, tau=3.0)
    assert l1 == 18.0 and l1 > l2


@given(st.integers(2, 10 ** 6), st.integers(2, 10 ** 6), st.floats(0.01, 100), st.floats(0.01, 100),
       st.floats(0, 10), st.floats(0.01, 10), st.floats(0.01, 0.99), st.floats(0, 1))
def test_theorem_thresholds_ordered(n, p, sigma, M, c0, c, nu, tau):
    l1, l2 = theorem_thresholds(n, p, Theorem(sigma, M, c0, c), nu, tau)
    assert l1 >= l2 > 0


def test_adaptive_is_a_policy():
    assert Adaptive() == Adaptive()
