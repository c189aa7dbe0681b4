"""Real-data workflow: noise augmentation and repeated train/test evaluation."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import normalize_columns
from .estimator import LolConfig, fit
from .metrics import estimated_sparsity, relative_error_observed
from .simulate import rng_for

# Exponential "parameter 2" is read as rate 2 (scale 1/2).
NOISE_FAMILIES = {
    "normal": lambda rng, n: rng.standard_normal(n),
    "lognormal": lambda rng, n: rng.lognormal(0.0, 1.0, n),
    "bernoulli": lambda rng, n: rng.integers(0, 2, n).astype(np.float64),
    "uniform": lambda rng, n: rng.uniform(-1.0, 1.0, n),
    "exponential": lambda rng, n: rng.exponential(0.5, n),
    "t2": lambda rng, n: rng.standard_t(2, n),
    "t1": lambda rng, n: rng.standard_t(1, n),
}


def augment(header: list[str], data: np.ndarray, count: int, families, seed: int):
    """Append ``count`` independent noise columns cycling through ``families``.

    Column ``j`` (0-based) draws from ``families[j % len(families)]`` with its
    own stream, so equal proportions hold whenever ``count`` is a multiple of
    the family count. New columns are named ``noise_<family>_<k>``, ``k``
    counting from 1 within each family.
    """
    families = list(families)
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if not families:
        raise ValueError("at least one noise family is required")
    unknown = [f for f in families if f not in NOISE_FAMILIES]
    if unknown:
        raise ValueError(f"unknown noise families {unknown}; choose from {sorted(NOISE_FAMILIES)}")
    n = data.shape[0]
    names, cols, seen = [], [], {}
    for j in range(count):
        fam = families[j % len(families)]
        seen[fam] = seen.get(fam, 0) + 1
        names.append(f"noise_{fam}_{seen[fam]}")
        cols.append(NOISE_FAMILIES[fam](rng_for(seed, j), n))
    new_header = list(header) + names
    dupes = sorted({h for h in new_header if new_header.count(h) > 1})
    if dupes:
        raise ValueError(f"duplicate output column names: {dupes}")
    return new_header, np.column_stack([data] + cols), names


@dataclass(frozen=True)
class HoldoutRecord:
    rep: int
    e_lol: float
    s_hat: int
    e_baseline: float | None


def _centered_train(x_train):
    mean = x_train.mean(axis=0)
    xc = x_train - mean
    keep = np.flatnonzero(np.any(xc != 0, axis=0))
    return mean, xc, keep


def _holdout_once(x, y, test_fraction, seed, rep, cfg, baseline_idx) -> HoldoutRecord:
    n = x.shape[0]
    perm = rng_for(seed, rep).permutation(n)
    n_test = int(round(test_fraction * n))
    test, train = np.sort(perm[:n_test]), np.sort(perm[n_test:])
    y_mean = y[train].mean()
    y_test = y[test] - y_mean

    mean, xc, keep = _centered_train(x[train])
    d = normalize_columns(xc[:, keep])
    res = fit(d, y[train] - y_mean, cfg)
    coef = res.estimate * d.scale
    pred = (x[test][:, keep] - mean[keep]) @ coef
    e_lol = relative_error_observed(y_test, pred)

    e_base = None
    if baseline_idx is not None:
        b = x[train][:, baseline_idx]
        bm = b.mean(axis=0)
        beta = np.linalg.lstsq(b - bm, y[train] - y_mean, rcond=None)[0]
        e_base = relative_error_observed(y_test, (x[test][:, baseline_idx] - bm) @ beta)
    return HoldoutRecord(rep, e_lol, estimated_sparsity(res.estimate), e_base)


def holdout(x: np.ndarray, y: np.ndarray, *, test_fraction: float = 0.25, reps: int = 100,
            seed: int = 0, cfg: LolConfig | None = None, baseline_idx=None,
            threads: int = 1) -> list[HoldoutRecord]:
    """Repeated random train/test splits.

    The response and the columns are centred with training means (the
    estimator has no intercept), the centred training columns are
    normalized, and the relative error is measured on the centred test
    response. The optional baseline is ordinary least squares with intercept
    on ``baseline_idx``.
    """
    if not 0 < test_fraction < 1:
        raise ValueError(f"test fraction must lie in (0, 1), got {test_fraction}")
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    n = x.shape[0]
    n_test = int(round(test_fraction * n))
    if n_test < 2:
        raise ValueError(f"test set would have {n_test} rows; at least 2 are required")
    if n - n_test < 2:
        raise ValueError("training set would have fewer than 2 rows")
    cfg = cfg or LolConfig()

    def one(rep):
        return _holdout_once(x, y, test_fraction, seed, rep, cfg, baseline_idx)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, range(reps)))
    return [one(r) for r in range(reps)]
