"""Learning Out of Leaders: screen, regress on the leaders, threshold.

The procedure has no iterations and no optimisation step:

0. coherence ``tau`` of the design and the leader capacity ``floor(nu / tau)``;
1. correlations ``X.T @ y / n``; the columns whose absolute correlation reaches
   ``lambda1`` are the leaders, at most ``cap`` of them (largest first);
2. least squares of ``y`` on the leaders; coefficients below ``lambda2`` in
   absolute value are set to zero.

With ``refit=True`` the surviving columns get one more least-squares pass
(the "plus" variant).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import DesignMatrix, coherence, leader_capacity
from .thresholding import Adaptive, Fixed, Theorem, ThresholdPolicy, adaptive_threshold, theorem_thresholds

CAP_ENFORCE = "enforce"
CAP_DISABLE = "disable"
MAX_CONDITION = 1e12


class NoLeadersError(ValueError):
    pass


class SingularGramError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class LolConfig:
    """Estimator settings.

    ``cap_mode=None`` resolves to ``"enforce"`` for fixed and theorem
    thresholds and ``"disable"`` for the adaptive policy. With the coherence
    cap disabled the leader set is still bounded by ``max_leaders`` so that
    the regression stays well posed; ``None`` means ``n // 2`` under the
    adaptive policy and no bound otherwise.
    """

    nu: float = 0.5
    policy: ThresholdPolicy = field(default_factory=Adaptive)
    cap_mode: str | None = None
    refit: bool = False
    max_leaders: int | None = None

    def __post_init__(self):
        if not 0 < self.nu < 1:
            raise ValueError(f"nu must lie in (0, 1), got {self.nu}")
        if not isinstance(self.policy, (Adaptive, Fixed, Theorem)):
            raise TypeError(f"unknown threshold policy {self.policy!r}")
        if self.cap_mode not in (None, CAP_ENFORCE, CAP_DISABLE):
            raise ValueError(f"cap_mode must be 'enforce' or 'disable', got {self.cap_mode!r}")
        if self.max_leaders is not None and self.max_leaders < 1:
            raise ValueError("max_leaders must be >= 1")

    @property
    def resolved_cap_mode(self) -> str:
        if self.cap_mode is not None:
            return self.cap_mode
        return CAP_DISABLE if isinstance(self.policy, Adaptive) else CAP_ENFORCE

    def leader_bound(self, n: int) -> int | None:
        if self.max_leaders is not None:
            return self.max_leaders
        if isinstance(self.policy, Adaptive):
            return max(1, n // 2)
        return None


@dataclass(frozen=True)
class Diagnostics:
    tau: float
    capacity: int
    cap_applied: int | None
    n_candidates: int
    n_leaders: int
    condition: float
    null_model: bool = False
    refitted: bool = False


@dataclass(frozen=True)
class FitResult:
    correlations: np.ndarray
    lambda1: float
    lambda2: float
    leaders: np.ndarray
    coefficients_on_leaders: np.ndarray
    estimate: np.ndarray
    prediction: np.ndarray
    diagnostics: Diagnostics

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.estimate)


def _check_response(d: DesignMatrix, y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.shape != (d.n,):
        raise ValueError(f"response has {y.size} entries, design has {d.n} rows")
    if not np.all(np.isfinite(y)):
        raise ValueError("response contains non-finite entries")
    return y


def correlations(d: DesignMatrix, y) -> np.ndarray:
    if not d.normalized:
        raise ValueError("design must be normalized (use normalize_columns)")
    y = _check_response(d, y)
    return d.values.T @ y / d.n


def select_leaders(corr, lambda1: float, cap: int | None = None) -> np.ndarray:
    """Indices with ``|corr| >= lambda1``, keeping the ``cap`` largest.

    Ties in magnitude go to the smaller index. Returned in ascending order.
    """
    a = np.abs(np.asarray(corr, dtype=np.float64))
    leaders = np.flatnonzero(a >= lambda1)
    if cap is not None:
        if cap < 1:
            raise ValueError(f"cap must be >= 1, got {cap}")
        if leaders.size > cap:
            order = np.argsort(-a[leaders], kind="stable")
            leaders = np.sort(leaders[order[:cap]])
    if leaders.size == 0:
        raise NoLeadersError("no leaders: no correlation reaches the first threshold")
    return leaders


def _least_squares(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    n, k = x.shape
    if k > n:
        raise ValueError(f"cannot regress on {k} columns with only {n} observations")
    coef, _, _, sv = np.linalg.lstsq(x, y, rcond=None)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
    if cond > MAX_CONDITION:
        raise SingularGramError(f"singular leader Gram: condition number {cond:.3g}")
    return coef, cond


def regress_on_leaders(d: DesignMatrix, y, leaders) -> np.ndarray:
    """Least-squares coefficients of ``y`` on the leader columns (SVD solve)."""
    y = _check_response(d, y)
    leaders = np.asarray(leaders, dtype=np.intp)
    if leaders.size == 0:
        raise ValueError("leader set is empty")
    return _least_squares(d.columns(leaders), y)[0]


def threshold_coefficients(beta, leaders, p: int, lambda2: float | None = None) -> np.ndarray:
    """Place ``beta`` on ``leaders`` in a length-``p`` vector, zeroing entries
    with ``|beta| < lambda2``. ``lambda2=None`` picks the level adaptively."""
    beta = np.asarray(beta, dtype=np.float64)
    leaders = np.asarray(leaders, dtype=np.intp)
    if beta.shape != leaders.shape:
        raise ValueError("beta and leaders must have the same length")
    if lambda2 is None:
        lambda2 = adaptive_threshold(np.abs(beta))
    est = np.zeros(p)
    keep = np.abs(beta) >= lambda2
    est[leaders[keep]] = beta[keep]
    return est


def refit(d: DesignMatrix, y, support) -> np.ndarray:
    """Least squares restricted to ``support``; no further thresholding."""
    support = np.asarray(support, dtype=np.intp)
    if support.size == 0:
        raise ValueError("cannot refit on an empty support")
    est = np.zeros(d.p)
    est[support] = regress_on_leaders(d, y, support)
    return est


def predict(d: DesignMatrix, estimate) -> np.ndarray:
    estimate = np.asarray(estimate, dtype=np.float64)
    if estimate.shape != (d.p,):
        raise ValueError(f"estimate has length {estimate.size}, design has {d.p} columns")
    nz = np.flatnonzero(estimate)
    return d.columns(nz) @ estimate[nz]


def _null_fit(d, corr, lambda1, diag_kwargs) -> FitResult:
    return FitResult(
        correlations=corr,
        lambda1=lambda1,
        lambda2=float("nan"),
        leaders=np.zeros(0, dtype=np.intp),
        coefficients_on_leaders=np.zeros(0),
        estimate=np.zeros(d.p),
        prediction=np.zeros(d.n),
        diagnostics=Diagnostics(n_leaders=0, condition=float("nan"), null_model=True, **diag_kwargs),
    )


def fit(d: DesignMatrix, y, cfg: LolConfig | None = None) -> FitResult:
    """Run the full estimator. An empty leader set yields the null model
    (zero estimate, ``diagnostics.null_model`` set); a singular leader Gram
    matrix raises :class:`SingularGramError`."""
    cfg = cfg or LolConfig()
    y = _check_response(d, y)
    n, p = d.n, d.p

    tau = coherence(d) if p >= 2 else 0.0
    capacity = leader_capacity(tau, cfg.nu, p)

    corr = correlations(d, y)
    abs_corr = np.abs(corr)
    policy = cfg.policy
    if isinstance(policy, Adaptive):
        lambda1 = adaptive_threshold(abs_corr)
        lambda2 = None
    elif isinstance(policy, Fixed):
        lambda1, lambda2 = policy.lambda1, policy.lambda2
    else:
        lambda1, lambda2 = theorem_thresholds(n, p, policy, cfg.nu, tau)

    cap = capacity if cfg.resolved_cap_mode == CAP_ENFORCE else cfg.leader_bound(n)
    diag_kwargs = dict(
        tau=tau,
        capacity=capacity,
        cap_applied=cap,
        n_candidates=int(np.count_nonzero(abs_corr >= lambda1)),
    )
    if cap == 0:
        return _null_fit(d, corr, lambda1, diag_kwargs)
    try:
        leaders = select_leaders(corr, lambda1, cap)
    except NoLeadersError:
        return _null_fit(d, corr, lambda1, diag_kwargs)

    beta, cond = _least_squares(d.columns(leaders), y)
    if lambda2 is None:
        lambda2 = adaptive_threshold(np.abs(beta))
    estimate = threshold_coefficients(beta, leaders, p, lambda2)

    refitted = False
    if cfg.refit:
        support = np.flatnonzero(estimate)
        if support.size and support.size < leaders.size:
            estimate = refit(d, y, support)
            refitted = True

    return FitResult(
        correlations=corr,
        lambda1=float(lambda1),
        lambda2=float(lambda2),
        leaders=leaders,
        coefficients_on_leaders=beta,
        estimate=estimate,
        prediction=predict(d, estimate),
        diagnostics=Diagnostics(n_leaders=int(leaders.size), condition=cond, refitted=refitted, **diag_kwargs),
    )
