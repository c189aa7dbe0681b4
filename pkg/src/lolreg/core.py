"""Design matrices, column normalization, coherence and RIP diagnostics.

Columns are normalized so that ``(1/n) * sum_i X[i, l]**2 == 1`` for every
column ``l``; all correlation-type quantities in the package assume this.
Column indices are 0-based throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

COHERENCE_BLOCK = 512


class ZeroColumnError(ValueError):
    def __init__(self, column: int):
        super().__init__(f"column {column} is identically zero and cannot be normalized")
        self.column = column


@dataclass(frozen=True)
class DesignMatrix:
    """An ``n x p`` regressor matrix.

    ``scale`` holds the per-column factors applied by :func:`normalize_columns`
    (``values = raw * scale``), so a coefficient ``b`` fitted on the normalized
    column corresponds to ``b * scale`` on the raw column.
    """

    values: np.ndarray
    normalized: bool = False
    scale: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError(f"design must be a non-empty 2-D array, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("design contains non-finite entries")
        values = np.asfortranarray(values)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.scale is not None:
            scale = np.array(self.scale, dtype=np.float64)
            if scale.shape != (values.shape[1],):
                raise ValueError("scale must have one entry per column")
            scale.setflags(write=False)
            object.__setattr__(self, "scale", scale)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def columns(self, idx) -> np.ndarray:
        return self.values[:, np.asarray(idx, dtype=np.intp)]

    def to_original_units(self, coef: np.ndarray) -> np.ndarray:
        """Map coefficients on normalized columns back to raw-column units."""
        coef = np.asarray(coef, dtype=np.float64)
        if self.scale is None:
            return coef.copy()
        return coef * self.scale


@dataclass(frozen=True)
class GroundTruth:
    """Simulation oracle: true coefficients, deterministic error ``u`` and noise level."""

    alpha: np.ndarray
    u: np.ndarray | None = None
    sigma: float = 0.0

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=np.float64)
        if alpha.ndim != 1:
            raise ValueError("alpha must be a vector")
        object.__setattr__(self, "alpha", alpha)
        if self.u is not None:
            u = np.asarray(self.u, dtype=np.float64)
            if u.ndim != 1 or not np.all(np.isfinite(u)):
                raise ValueError("u must be a finite vector")
            object.__setattr__(self, "u", u)
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")

    @property
    def support_size(self) -> int:
        return int(np.count_nonzero(self.alpha))

    def u_or_zeros(self, n: int) -> np.ndarray:
        return np.zeros(n) if self.u is None else self.u


@dataclass(frozen=True)
class CoherenceReport:
    tau: float
    capacity: int
    nu: float


def normalize_columns(m) -> DesignMatrix:
    """Rescale every column to empirical second moment one.

    Accepts a raw array or a :class:`DesignMatrix`; in the latter case the
    scale factors compose, so they still refer to the original raw columns.
    A column whose largest entry is subnormal (below about 1e-308) has a scale
    beyond the float range; its normalized values are still exact but its
    scale is reported as ``inf``.
    """
    prior_scale = None
    if isinstance(m, DesignMatrix):
        prior_scale = m.scale
        m = m.values
    x = np.array(m, dtype=np.float64, order="F")
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise ValueError(f"design must be a non-empty 2-D array, got shape {x.shape}")
    n = x.shape[0]
    amax = np.max(np.abs(x), axis=0)
    zero = np.flatnonzero(amax == 0)
    if zero.size:
        raise ZeroColumnError(int(zero[0]))
    # work on max-scaled columns so tiny or huge entries neither underflow nor overflow
    x /= amax
    unit = math.sqrt(n) / np.sqrt(np.einsum("ij,ij->j", x, x))
    x *= unit
    with np.errstate(over="ignore"):
        scale = unit / amax
    if prior_scale is not None:
        scale = scale * prior_scale
    return DesignMatrix(x, normalized=True, scale=scale)


def _require_normalized(d: DesignMatrix):
    if not d.normalized:
        raise ValueError("design must be normalized (use normalize_columns)")


def coherence(d: DesignMatrix, block: int = COHERENCE_BLOCK) -> float:
    """Largest absolute off-diagonal entry of ``X.T @ X / n``.

    Computed block by block over the upper triangle so the full ``p x p``
    Gram matrix is never held in memory.
    """
    _require_normalized(d)
    x, n, p = d.values, d.n, d.p
    if p < 2:
        raise ValueError("coherence is undefined for fewer than two columns")
    tau = 0.0
    for i0 in range(0, p, block):
        xi = x[:, i0:i0 + block]
        for j0 in range(i0, p, block):
            g = np.abs(xi.T @ x[:, j0:j0 + block]) / n
            if i0 == j0:
                np.fill_diagonal(g, 0.0)
            tau = max(tau, float(g.max()))
    return tau


def leader_capacity(tau: float, nu: float, p: int) -> int:
    """Largest leader-set size ``floor(nu / tau)``; ``p`` when ``tau == 0``."""
    if not 0 < nu < 1:
        raise ValueError(f"nu must lie in (0, 1), got {nu}")
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    if tau == 0:
        return int(p)
    return int(math.floor(nu / tau))


def coherence_report(d: DesignMatrix, nu: float = 0.5) -> CoherenceReport:
    tau = coherence(d)
    return CoherenceReport(tau=tau, capacity=leader_capacity(tau, nu, d.p), nu=nu)


def _check_indices(idx, p: int) -> np.ndarray:
    idx = np.asarray(idx, dtype=np.intp).ravel()
    if idx.size and (idx.min() < 0 or idx.max() >= p):
        raise IndexError(f"column indices must lie in [0, {p})")
    if np.unique(idx).size != idx.size:
        raise ValueError("column indices must be distinct")
    return idx


def rip_bounds_check(d: DesignMatrix, indices, nu: float) -> tuple[float, float, bool]:
    """Extreme eigenvalues of the restricted Gram matrix and the RIP verdict.

    Returns ``(lower, upper, passed)`` with ``passed`` true when every
    eigenvalue of ``X_I.T @ X_I / n`` lies in ``[1 - nu, 1 + nu]``.
    """
    _require_normalized(d)
    idx = _check_indices(indices, d.p)
    if idx.size == 0:
        raise ValueError("index set must be non-empty")
    xi = d.columns(idx)
    eig = np.linalg.eigvalsh(xi.T @ xi / d.n)
    lower, upper = float(eig[0]), float(eig[-1])
    return lower, upper, bool(lower >= 1 - nu and upper <= 1 + nu)
