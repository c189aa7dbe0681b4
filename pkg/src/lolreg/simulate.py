"""Monte-Carlo experiments: random designs, sparse coefficients, calibrated noise.

Randomness
----------
Every random draw comes from numpy's PCG64 bit generator seeded through
``SeedSequence(seed, spawn_key=key)``. Replication ``k`` of an experiment
uses the keys ``(k, 0)`` for the design, ``(k, 1)`` for the coefficients,
``(k, 2)`` for the noise and ``(k, 3)`` for the dependency surgery, so its
draws do not depend on how many replications are run or in which order.
Sweep point ``i`` runs with seed ``derive_seed(base_seed, i)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .core import DesignMatrix, GroundTruth, ZeroColumnError, normalize_columns
from .estimator import LolConfig, fit
from .metrics import evaluate

RNG_ALGORITHM = "numpy.PCG64+SeedSequence/v1"
STREAM_DESIGN, STREAM_COEF, STREAM_NOISE, STREAM_DEPENDENCY = range(4)
SNR_CONVENTIONS = ("variance", "amplitude")
PLACEMENTS = ("first", "random")
METRIC_NAMES = ("e_y_observed", "e_y_signal", "d_loss", "s_hat", "tau", "leaders_count")


def rng_for(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=tuple(key))))


def derive_seed(seed: int, *key: int) -> int:
    state = np.random.SeedSequence(int(seed), spawn_key=tuple(key)).generate_state(1, dtype=np.uint64)
    return int(state[0])


@dataclass(frozen=True)
class DesignFamily:
    """Entry law of a random design: ``gaussian`` N(0,1), ``uniform`` U[-1,1],
    ``bernoulli`` uniform on {-1,+1}, or ``student`` t with ``dof`` degrees."""

    kind: str
    dof: int | None = None

    def __post_init__(self):
        if self.kind not in ("gaussian", "uniform", "bernoulli", "student"):
            raise ValueError(f"unknown design family {self.kind!r}")
        if self.kind == "student":
            if self.dof is None or int(self.dof) != self.dof or self.dof < 1:
                raise ValueError("student family needs an integer dof >= 1")
        elif self.dof is not None:
            raise ValueError(f"{self.kind} family takes no dof")

    @classmethod
    def parse(cls, text: str) -> "DesignFamily":
        t = text.strip().lower()
        for prefix in ("student:", "student", "t"):
            if t.startswith(prefix) and t[len(prefix):].isdigit():
                return cls("student", int(t[len(prefix):]))
        return cls(t)

    @property
    def label(self) -> str:
        return f"t{self.dof}" if self.kind == "student" else self.kind

    def draw(self, size, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "gaussian":
            return rng.standard_normal(size)
        if self.kind == "uniform":
            return rng.uniform(-1.0, 1.0, size)
        if self.kind == "bernoulli":
            return 2.0 * rng.integers(0, 2, size) - 1.0
        z = rng.standard_normal(size)
        return z / np.sqrt(rng.chisquare(self.dof, size) / self.dof)


GAUSSIAN = DesignFamily("gaussian")


def gen_design(family: DesignFamily, n: int, p: int, rng) -> DesignMatrix:
    """i.i.d. ``n x p`` draws from ``family``, columns normalized.

    A draw with an all-zero column is redrawn once before giving up.
    """
    rng = np.random.default_rng(rng)
    for attempt in range(2):
        try:
            return normalize_columns(family.draw((n, p), rng))
        except ZeroColumnError:
            if attempt:
                raise


def gen_coefficients(p: int, s: int, rng, placement: str = "first") -> np.ndarray:
    """Sparse coefficients ``(-1)**b * |z|`` with ``b ~ Bernoulli(1/2)``, ``z ~ N(2, 1)``."""
    if not 0 <= s <= p:
        raise ValueError(f"sparsity must lie in [0, {p}], got {s}")
    if placement not in PLACEMENTS:
        raise ValueError(f"placement must be one of {PLACEMENTS}")
    rng = np.random.default_rng(rng)
    alpha = np.zeros(p)
    if s == 0:
        return alpha
    signs = 1.0 - 2.0 * rng.integers(0, 2, s)
    values = signs * np.abs(rng.normal(2.0, 1.0, s))
    idx = np.arange(s) if placement == "first" else np.sort(rng.choice(p, s, replace=False))
    alpha[idx] = values
    return alpha


def noise_sigma_for_snr(d: DesignMatrix, alpha, snr: float, convention: str = "variance") -> float:
    """Noise level giving ``Var(X @ alpha) / sigma**2 == snr``.

    ``Var`` is the population variance over the ``n`` signal values. With
    ``convention="amplitude"`` the ratio is taken between standard deviations.
    """
    if not snr > 0:
        raise ValueError(f"snr must be > 0, got {snr}")
    if convention not in SNR_CONVENTIONS:
        raise ValueError(f"snr convention must be one of {SNR_CONVENTIONS}")
    alpha = np.asarray(alpha, dtype=np.float64)
    nz = np.flatnonzero(alpha)
    var = float(np.var(d.columns(nz) @ alpha[nz])) if nz.size else 0.0
    if var == 0:
        raise ValueError("signal has zero variance; SNR is undefined")
    if convention == "variance":
        return math.sqrt(var / snr)
    return math.sqrt(var) / snr


def _sym_power(w: np.ndarray, v: np.ndarray, power: float) -> np.ndarray:
    return (v * w ** power) @ v.T


def nearest_correlation(w: np.ndarray, floor: float = 1e-6) -> np.ndarray:
    """Clip eigenvalues at ``floor`` and rescale to unit diagonal.

    Matrices that are already valid (smallest eigenvalue >= floor) come back
    unchanged.
    """
    w = 0.5 * (w + w.T)
    vals, vecs = np.linalg.eigh(w)
    if vals[0] >= floor:
        return w
    c = (vecs * np.maximum(vals, floor)) @ vecs.T
    s = 1.0 / np.sqrt(np.diag(c))
    c = c * s[:, None] * s[None, :]
    return 0.5 * (c + c.T)


def inject_dependency(d: DesignMatrix, alpha, fraction: float, rng,
                      u_range: tuple[float, float] = (0.90, 0.95)) -> DesignMatrix:
    """Plant strong correlations among the support and ``S`` random other columns.

    The ``2S`` selected columns ``B`` have Gram matrix ``W1 = B.T B / n``; a
    ``fraction`` of its off-diagonal pairs is overwritten with ``+-u``,
    ``u ~ U[u_range]``, giving ``W2`` (projected back to a valid correlation
    matrix if needed). The columns are replaced by ``B W1^{-1/2} W2^{1/2}``,
    whose Gram matrix is ``W2``.
    """
    if not 0 <= fraction < 1:
        raise ValueError(f"dependency fraction must lie in [0, 1), got {fraction}")
    rng = np.random.default_rng(rng)
    alpha = np.asarray(alpha, dtype=np.float64)
    support = np.flatnonzero(alpha)
    s, n, p = support.size, d.n, d.p
    if s < 1 or 2 * s > p or 2 * s > n:
        raise ValueError(f"dependency needs 1 <= S, 2S <= p and 2S <= n (S={s}, n={n}, p={p})")

    others = np.setdiff1d(np.arange(p), support)
    cols = np.concatenate([support, np.sort(rng.choice(others, s, replace=False))])
    block = d.columns(cols)
    w1 = block.T @ block / n
    vals, vecs = np.linalg.eigh(0.5 * (w1 + w1.T))
    if vals[0] <= 0 or vals[-1] / vals[0] > 1e12:
        raise np.linalg.LinAlgError("correlation matrix of the selected columns is singular")

    w2 = w1.copy()
    iu, ju = np.triu_indices(2 * s, 1)
    count = int(round(fraction * iu.size))
    if count:
        pick = rng.choice(iu.size, count, replace=False)
        signs = 1.0 - 2.0 * rng.integers(0, 2, count)
        new = signs * rng.uniform(u_range[0], u_range[1], count)
        w2[iu[pick], ju[pick]] = new
        w2[ju[pick], iu[pick]] = new
    w2 = nearest_correlation(w2)

    v2, q2 = np.linalg.eigh(w2)
    z = block @ _sym_power(vals, vecs, -0.5) @ _sym_power(np.maximum(v2, 0.0), q2, 0.5)
    x = np.array(d.values)
    x[:, cols] = z
    return normalize_columns(x)


@dataclass(frozen=True)
class Dependency:
    fraction: float
    u_range: tuple[float, float] = (0.90, 0.95)

    def __post_init__(self):
        if not 0 < self.fraction < 1:
            raise ValueError(f"dependency fraction must lie in (0, 1), got {self.fraction}")
        lo, hi = self.u_range
        if not 0 <= lo <= hi <= 1:
            raise ValueError(f"invalid u_range {self.u_range}")


@dataclass(frozen=True)
class ExperimentSpec:
    family: DesignFamily = GAUSSIAN
    n: int = 250
    p: int = 1000
    s: int = 10
    snr: float = 5.0
    reps: int = 1
    seed: int = 0
    dependency: Dependency | None = None
    config: LolConfig = field(default_factory=lambda: LolConfig(refit=True))
    placement: str = "first"
    snr_convention: str = "variance"

    def __post_init__(self):
        if self.n < 2 or self.p < 1:
            raise ValueError(f"need n >= 2 and p >= 1, got n={self.n}, p={self.p}")
        if not 1 <= self.s <= self.p:
            raise ValueError(f"sparsity must lie in [1, p={self.p}], got {self.s}")
        if not self.snr > 0:
            raise ValueError(f"snr must be > 0, got {self.snr}")
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.placement not in PLACEMENTS:
            raise ValueError(f"placement must be one of {PLACEMENTS}")
        if self.snr_convention not in SNR_CONVENTIONS:
            raise ValueError(f"snr convention must be one of {SNR_CONVENTIONS}")
        if self.dependency is not None and (2 * self.s > self.p or 2 * self.s > self.n):
            raise ValueError("dependency surgery needs 2S <= p and 2S <= n")

    @property
    def delta(self) -> float:
        return 1.0 - self.n / self.p

    @property
    def rho(self) -> float:
        return self.s / self.n


@dataclass(frozen=True)
class ReplicationRecord:
    rep: int
    e_y_observed: float
    e_y_signal: float
    d_loss: float
    s_hat: float
    tau: float
    leaders_count: float
    error: str | None = None


@dataclass(frozen=True)
class ExperimentResult:
    spec: ExperimentSpec
    records: tuple[ReplicationRecord, ...]
    aggregates: dict[str, tuple[float, float]]

    @property
    def failures(self) -> int:
        return sum(r.error is not None for r in self.records)

    def mean(self, name: str) -> float:
        return self.aggregates[name][0]

    def sd(self, name: str) -> float:
        return self.aggregates[name][1]

    def row(self) -> dict:
        sp = self.spec
        return {
            "family": sp.family.label,
            "n": sp.n,
            "p": sp.p,
            "S": sp.s,
            "snr": sp.snr,
            "delta": sp.delta,
            "rho": sp.rho,
            "tau_mean": self.mean("tau"),
            "e_y_obs_mean": self.mean("e_y_observed"),
            "e_y_obs_sd": self.sd("e_y_observed"),
            "e_y_sig_mean": self.mean("e_y_signal"),
            "e_y_sig_sd": self.sd("e_y_signal"),
            "s_hat_mean": self.mean("s_hat"),
            "seed": sp.seed,
        }


def aggregate(records) -> dict[str, tuple[float, float]]:
    """Mean and sample sd of each metric over the successful records, in record order."""
    ok = [r for r in records if r.error is None]
    out = {}
    for name in METRIC_NAMES:
        v = np.array([getattr(r, name) for r in ok], dtype=np.float64)
        if v.size == 0:
            out[name] = (float("nan"), float("nan"))
        else:
            out[name] = (float(np.mean(v)), float(np.std(v, ddof=1)) if v.size > 1 else 0.0)
    return out


def simulate_replication(spec: ExperimentSpec, k: int):
    """Design, truth and response for replication ``k``."""
    d = gen_design(spec.family, spec.n, spec.p, rng_for(spec.seed, k, STREAM_DESIGN))
    alpha = gen_coefficients(spec.p, spec.s, rng_for(spec.seed, k, STREAM_COEF), spec.placement)
    if spec.dependency is not None:
        d = inject_dependency(d, alpha, spec.dependency.fraction,
                              rng_for(spec.seed, k, STREAM_DEPENDENCY), spec.dependency.u_range)
    sigma = noise_sigma_for_snr(d, alpha, spec.snr, spec.snr_convention)
    truth = GroundTruth(alpha=alpha, sigma=sigma)
    nz = np.flatnonzero(alpha)
    noise = rng_for(spec.seed, k, STREAM_NOISE).standard_normal(spec.n)
    y = d.columns(nz) @ alpha[nz] + truth.u_or_zeros(spec.n) + sigma * noise
    return d, truth, y


def _run_one(spec: ExperimentSpec, k: int) -> ReplicationRecord:
    try:
        d, truth, y = simulate_replication(spec, k)
        m = evaluate(d, y, fit(d, y, spec.config), truth)
    except (ValueError, np.linalg.LinAlgError) as exc:
        nan = float("nan")
        return ReplicationRecord(k, nan, nan, nan, nan, nan, nan, error=f"{type(exc).__name__}: {exc}")
    return ReplicationRecord(k, m.e_y_observed, m.e_y_signal, m.d_loss, m.s_hat, m.tau, m.leaders_count)


def run_experiment(spec: ExperimentSpec, threads: int = 1) -> ExperimentResult:
    """Run ``spec.reps`` independent replications; failures are recorded, not raised."""
    ks = range(spec.reps)
    if threads > 1 and spec.reps > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = tuple(pool.map(lambda k: _run_one(spec, k), ks))
    else:
        records = tuple(_run_one(spec, k) for k in ks)
    return ExperimentResult(spec=spec, records=records, aggregates=aggregate(records))


SWEEP_AXES = ("n", "delta", "s", "rho", "family", "snr")


def sweep_specs(base: ExperimentSpec, axis: str, values) -> list[ExperimentSpec]:
    """One spec per grid value, each with its own derived seed. Validates the
    whole grid before anything runs."""
    if axis not in SWEEP_AXES:
        raise ValueError(f"sweep axis must be one of {SWEEP_AXES}, got {axis!r}")
    values = list(values)
    if not values:
        raise ValueError("sweep needs at least one value")
    specs = []
    for i, v in enumerate(values):
        seed = derive_seed(base.seed, i)
        if axis == "n":
            changes = {"n": int(v)}
        elif axis == "delta":
            if not 0 <= float(v) < 1:
                raise ValueError(f"delta must lie in [0, 1), got {v}")
            changes = {"n": int(round(base.p * (1 - float(v))))}
        elif axis == "s":
            changes = {"s": int(v)}
        elif axis == "rho":
            if not float(v) > 0:
                raise ValueError(f"rho must be > 0, got {v}")
            changes = {"s": max(1, int(round(float(v) * base.n)))}
        elif axis == "family":
            changes = {"family": v if isinstance(v, DesignFamily) else DesignFamily.parse(str(v))}
        else:
            changes = {"snr": float(v)}
        specs.append(replace(base, seed=seed, **changes))
    return specs


def sweep(base: ExperimentSpec, axis: str, values, threads: int = 1) -> list[ExperimentResult]:
    return [run_experiment(sp, threads) for sp in sweep_specs(base, axis, values)]


def spec_to_dict(spec: ExperimentSpec) -> dict:
    """JSON-friendly view of a spec, used to embed the resolved config in outputs."""
    out = asdict(spec)
    out["family"] = spec.family.label
    out["config"]["policy"] = {"kind": type(spec.config.policy).__name__.lower(),
                               **asdict(spec.config.policy)}
    out["config"]["cap_mode"] = spec.config.resolved_cap_mode
    return out
