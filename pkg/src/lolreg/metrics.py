"""Prediction-error and sparsity measures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DesignMatrix, GroundTruth


@dataclass(frozen=True)
class MetricRecord:
    e_y_observed: float
    e_y_signal: float
    d_loss: float
    s_hat: int
    tau: float
    leaders_count: int


def _sq(v) -> float:
    v = np.asarray(v, dtype=np.float64)
    return float(v @ v)


def relative_error_observed(y, yhat) -> float:
    """``||y - yhat||^2 / ||y||^2``."""
    y = np.asarray(y, dtype=np.float64)
    yhat = np.asarray(yhat, dtype=np.float64)
    if y.shape != yhat.shape:
        raise ValueError("y and yhat must have the same shape")
    denom = _sq(y)
    if denom == 0:
        raise ValueError("relative error undefined for a zero response")
    return _sq(y - yhat) / denom


def relative_error_signal(signal, yhat) -> float:
    """Error against the noiseless mean response, ``||yhat - s||^2 / ||s||^2``."""
    signal = np.asarray(signal, dtype=np.float64)
    yhat = np.asarray(yhat, dtype=np.float64)
    if signal.shape != yhat.shape:
        raise ValueError("signal and yhat must have the same shape")
    denom = _sq(signal)
    if denom == 0:
        raise ValueError("relative error undefined for a zero signal")
    return _sq(yhat - signal) / denom


def d_loss(d: DesignMatrix, estimate, truth: GroundTruth) -> float:
    """Empirical norm ``||X (estimate - alpha) + u||_n`` (root mean square)."""
    diff = np.asarray(estimate, dtype=np.float64) - truth.alpha
    nz = np.flatnonzero(diff)
    r = d.columns(nz) @ diff[nz] + truth.u_or_zeros(d.n)
    return float(np.sqrt(_sq(r) / d.n))


def estimated_sparsity(estimate) -> int:
    return int(np.count_nonzero(estimate))


def evaluate(d: DesignMatrix, y, fit, truth: GroundTruth) -> MetricRecord:
    """All metrics for one fitted replication."""
    alpha = truth.alpha
    nz = np.flatnonzero(alpha)
    signal = d.columns(nz) @ alpha[nz]
    return MetricRecord(
        e_y_observed=relative_error_observed(y, fit.prediction),
        e_y_signal=relative_error_signal(signal, fit.prediction),
        d_loss=d_loss(d, fit.estimate, truth),
        s_hat=estimated_sparsity(fit.estimate),
        tau=fit.diagnostics.tau,
        leaders_count=fit.diagnostics.n_leaders,
    )
