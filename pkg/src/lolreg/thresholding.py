"""Threshold selection: data-driven two-class split and theory-driven levels."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Relative tolerance under which two split scores count as tied.
TIE_RTOL = 1e-12


class DegenerateSplitError(ValueError):
    pass


@dataclass(frozen=True)
class Adaptive:
    """Both thresholds chosen by :func:`adaptive_split`."""


@dataclass(frozen=True)
class Fixed:
    lambda1: float
    lambda2: float

    def __post_init__(self):
        if not self.lambda1 >= self.lambda2 >= 0:
            raise ValueError(
                f"fixed thresholds need lambda1 >= lambda2 >= 0, got {self.lambda1}, {self.lambda2}")


@dataclass(frozen=True)
class Theorem:
    """Thresholds from the worst-case theory; ``M`` bounds the l1 norm of the
    coefficients, ``c0`` the deterministic error, ``c`` the coherence rate."""

    sigma: float
    M: float
    c0: float = 0.0
    c: float = 1.0

    def __post_init__(self):
        if not (self.sigma > 0 and self.M > 0 and self.c0 >= 0 and self.c > 0):
            raise ValueError("theorem thresholds need sigma > 0, M > 0, c0 >= 0, c > 0")


ThresholdPolicy = Adaptive | Fixed | Theorem


@dataclass(frozen=True)
class SplitResult:
    threshold: float
    between_class_variance: float
    lower_count: int
    upper_count: int


def adaptive_split(values) -> SplitResult:
    """Split non-negative values into a low and a high class.

    Every cut between consecutive distinct sorted values is scored by the
    between-class variance ``n1 * n2 * (m1 - m2)**2 / (n1 + n2)**2`` and the
    best one wins. Scores within ``TIE_RTOL`` of the best are ties, resolved
    towards the smallest upper class. The threshold is the midpoint of the
    two values adjacent to the cut, so ``values >= threshold`` is exactly
    the upper class.
    """
    x = np.sort(np.asarray(values, dtype=np.float64).ravel())
    m = x.size
    if m < 2:
        raise ValueError("adaptive_split needs at least two values")
    if x[0] < 0 or not np.all(np.isfinite(x)):
        raise ValueError("adaptive_split expects finite non-negative values")
    if x[0] == x[-1]:
        raise DegenerateSplitError("degenerate: no split, all values are identical")

    csum = np.cumsum(x)
    n1 = np.arange(1, m, dtype=np.float64)
    n2 = m - n1
    mu1 = csum[:-1] / n1
    mu2 = (csum[-1] - csum[:-1]) / n2
    score = n1 * n2 * (mu1 - mu2) ** 2 / float(m) ** 2
    score[x[1:] == x[:-1]] = -np.inf

    best = score.max()
    k = int(np.flatnonzero(score >= best * (1 - TIE_RTOL))[-1])
    threshold = 0.5 * (x[k] + x[k + 1])
    if not threshold > x[k]:
        threshold = x[k + 1]
    return SplitResult(float(threshold), float(best), k + 1, m - k - 1)


def adaptive_threshold(values) -> float:
    """Threshold from :func:`adaptive_split`, or 0.0 (keep everything) when
    there is nothing to split: fewer than two values, or all identical."""
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        return 0.0
    try:
        return adaptive_split(values).threshold
    except DegenerateSplitError:
        return 0.0


def theorem_constants(policy: Theorem, nu: float) -> tuple[float, float]:
    s = policy.sigma
    t1 = max(64 * s, 1.0, 2 / ((1 - nu) * s))
    t2 = max(6 * policy.M, (4 * policy.M + 3 * policy.c0) / (12 * s))
    return t1, t2


def theorem_thresholds(n: int, p: int, policy: Theorem, nu: float, tau: float) -> tuple[float, float]:
    """``(lambda1, lambda2)`` with ``T3 = T4 = max(T1, T2 * c, 1)``.

    ``lambda2 = T3 * sqrt(log p / n)`` and ``lambda1`` additionally covers
    the coherence term ``T2 * tau``. Natural log.
    """
    if n < 2 or p < 2:
        raise ValueError("theorem thresholds need n >= 2 and p >= 2")
    if not 0 < nu < 1:
        raise ValueError(f"nu must lie in (0, 1), got {nu}")
    t1, t2 = theorem_constants(policy, nu)
    t34 = max(t1, t2 * policy.c, 1.0)
    rate = math.sqrt(math.log(p) / n)
    lambda2 = t34 * rate
    lambda1 = max(t34 * rate, t2 * tau)
    return lambda1, lambda2
