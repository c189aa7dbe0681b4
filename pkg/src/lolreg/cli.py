"""Command-line front end: ``lolreg {fit,simulate,sweep,augment,coherence,holdout}``.

Exit codes: 0 success, 1 numerical failure, 2 usage or validation error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys

import numpy as np

from . import io as lio
from .core import coherence, leader_capacity, normalize_columns
from .estimator import CAP_DISABLE, CAP_ENFORCE, LolConfig, SingularGramError, fit
from .metrics import relative_error_observed
from .realdata import NOISE_FAMILIES, augment, holdout
from .simulate import (RNG_ALGORITHM, SWEEP_AXES, Dependency, DesignFamily, ExperimentSpec,
                       run_experiment, spec_to_dict, sweep_specs)
from .thresholding import Adaptive, Fixed, Theorem

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
HIGH_COHERENCE = 0.5


class UsageError(Exception):
    pass


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _shared(threads=True, policy=True) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--nu", type=float, default=0.5)
    p.add_argument("--out", help="output path (default: standard output)")
    if threads:
        p.add_argument("--threads", type=_positive_int, default=1)
    if policy:
        g = p.add_mutually_exclusive_group()
        g.add_argument("--adaptive", action="store_true", help="data-driven thresholds (default)")
        g.add_argument("--theorem", nargs=4, type=float, metavar=("SIGMA", "M", "C0", "C"))
        p.add_argument("--lambda1", type=float)
        p.add_argument("--lambda2", type=float)
        p.add_argument("--refit", action="store_true")
        p.add_argument("--cap", choices=(CAP_ENFORCE, CAP_DISABLE))
        p.add_argument("--max-leaders", type=_positive_int)
    return p


def _config(args) -> LolConfig:
    fixed = args.lambda1 is not None or args.lambda2 is not None
    if fixed and (args.adaptive or args.theorem):
        raise UsageError("--lambda1/--lambda2 cannot be combined with --adaptive or --theorem")
    if fixed:
        if args.lambda1 is None or args.lambda2 is None:
            raise UsageError("--lambda1 and --lambda2 must be given together")
        policy = Fixed(args.lambda1, args.lambda2)
    elif args.theorem:
        policy = Theorem(*args.theorem)
    else:
        policy = Adaptive()
    return LolConfig(nu=args.nu, policy=policy, cap_mode=args.cap, refit=args.refit,
                     max_leaders=args.max_leaders)


def _config_dict(cfg: LolConfig) -> dict:
    return {
        "nu": cfg.nu,
        "policy": {"kind": type(cfg.policy).__name__.lower(), **vars(cfg.policy)},
        "cap_mode": cfg.resolved_cap_mode,
        "refit": cfg.refit,
        "max_leaders": cfg.max_leaders,
    }


def _emit(args, text: str):
    if args.out:
        lio.write_text(args.out, text)
    else:
        sys.stdout.write(text)


def _meta(args, command: str, **extra) -> dict:
    meta = {"format_version": lio.FORMAT_VERSION, "command": command, "seed": args.seed,
            "rng": RNG_ALGORITHM}
    meta.update({k: json.dumps(v, sort_keys=True) if isinstance(v, (dict, list)) else v
                 for k, v in extra.items()})
    return meta


def cmd_fit(args) -> int:
    cfg = _config(args)
    header, x = lio.read_numeric_csv(args.design)
    _, yv = lio.read_numeric_csv(args.response)
    if yv.shape[1] != 1:
        raise UsageError(f"response file must have exactly one column, found {yv.shape[1]}")
    if yv.shape[0] != x.shape[0]:
        raise UsageError(f"design has {x.shape[0]} rows but response has {yv.shape[0]}")
    y = yv[:, 0]
    d = normalize_columns(x)
    res = fit(d, y, cfg)
    support = res.support
    report = {
        "format_version": lio.FORMAT_VERSION,
        "rng": RNG_ALGORITHM,
        "seed": args.seed,
        "command": "fit",
        "config": _config_dict(cfg),
        "inputs": {"design": args.design, "response": args.response, "n": d.n, "p": d.p},
        "lambda1": res.lambda1,
        "lambda2": res.lambda2,
        "leaders": [{"index": int(i), "name": header[i]} for i in res.leaders],
        "estimate": [[int(i), float(res.estimate[i])] for i in support],
        "estimate_original_units": [[int(i), float(res.estimate[i] * d.scale[i])] for i in support],
        "support_names": [header[i] for i in support],
        "diagnostics": vars(res.diagnostics),
        "residual_norm": float(np.linalg.norm(y - res.prediction)),
        "e_y_in_sample": relative_error_observed(y, res.prediction) if np.any(y) else None,
    }
    if not args.no_timestamp:
        report["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    _emit(args, lio.dumps_report(report))
    if args.predictions:
        rows = [{"row": i, "y": y[i], "prediction": res.prediction[i]} for i in range(d.n)]
        text = lio.format_table(("row", "y", "prediction"), rows, _meta(args, "fit"))
        lio.write_text(args.predictions, text)
    return EXIT_OK


def _base_spec(args) -> ExperimentSpec:
    dep = Dependency(args.dependency) if args.dependency else None
    return ExperimentSpec(
        family=DesignFamily.parse(args.family), n=args.n, p=args.p, s=args.s, snr=args.snr,
        reps=args.reps, seed=args.seed, dependency=dep, config=_config(args),
        placement=args.placement, snr_convention=args.snr_convention,
    )


def _write_results(args, command, specs, extra_meta):
    if args.detail and not args.out:
        raise UsageError("--detail needs --out (the detail file is written next to it)")
    results = [run_experiment(sp, args.threads) for sp in specs]
    meta = _meta(args, command, config=spec_to_dict(specs[0]), **extra_meta)
    table = lio.format_table(lio.RESULTS_COLUMNS, [r.row() for r in results], meta)
    if args.out:
        lio.write_text(args.out, table)
    sys.stdout.write(table)
    if args.detail:
        rows = [{"point": i, **vars(rec)} for i, r in enumerate(results) for rec in r.records]
        detail = lio.format_table(lio.DETAIL_COLUMNS, rows, meta)
        lio.write_text(_detail_path(args.out), detail)
    failures = sum(r.failures for r in results)
    if failures:
        print(f"warning: {failures} replication(s) failed; see the detail output", file=sys.stderr)
    return EXIT_OK


def _detail_path(out: str) -> str:
    return out[:-4] + "_detail.csv" if out.endswith(".csv") else out + ".detail.csv"


def cmd_simulate(args) -> int:
    spec = _base_spec(args)
    return _write_results(args, "simulate", [spec], {})


def _parse_values(axis: str, text: str):
    items = [t.strip() for t in text.split(",") if t.strip()]
    if not items:
        raise UsageError("--values must list at least one value")
    try:
        if axis in ("n", "s"):
            return [int(t) for t in items]
        if axis == "family":
            return [DesignFamily.parse(t) for t in items]
        return [float(t) for t in items]
    except ValueError as exc:
        raise UsageError(f"bad --values for axis {axis}: {exc}") from None


def cmd_sweep(args) -> int:
    values = _parse_values(args.axis, args.values)
    specs = sweep_specs(_base_spec(args), args.axis, values)
    return _write_results(args, "sweep", specs, {"axis": args.axis, "values": args.values})


def cmd_augment(args) -> int:
    header, data = lio.read_numeric_csv(args.data)
    families = [f.strip() for f in args.families.split(",") if f.strip()]
    new_header, out, _ = augment(header, data, args.count, families, args.seed)
    meta = _meta(args, "augment", count=args.count, families=",".join(families))
    rows = [dict(zip(new_header, (repr(float(v)) for v in row))) for row in out]
    _emit(args, lio.format_table(new_header, rows, meta))
    return EXIT_OK


def cmd_coherence(args) -> int:
    _, x = lio.read_numeric_csv(args.design)
    d = normalize_columns(x)
    tau = coherence(d)
    lines = [f"# format_version={lio.FORMAT_VERSION}", f"n={d.n}", f"p={d.p}", f"nu={args.nu}",
             f"tau={tau:.6g}"]
    if tau == 0:
        lines.append("N=no cap (orthogonal columns)")
    else:
        lines.append(f"N={leader_capacity(tau, args.nu, d.p)}")
    if tau > HIGH_COHERENCE:
        lines.append(f"warning: high coherence (tau > {HIGH_COHERENCE}); "
                     "the leader capacity guarantee is weak")
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_holdout(args) -> int:
    header, data = lio.read_numeric_csv(args.data)
    if args.target not in header:
        raise UsageError(f"target column {args.target!r} not found")
    t = header.index(args.target)
    names = [h for h in header if h != args.target]
    x = np.delete(data, t, axis=1)
    y = data[:, t]
    baseline = None
    if args.baseline_cols:
        wanted = [c.strip() for c in args.baseline_cols.split(",") if c.strip()]
        missing = [c for c in wanted if c not in names]
        if missing:
            raise UsageError(f"baseline columns not found: {missing}")
        baseline = [names.index(c) for c in wanted]
    cfg = _config(args)
    recs = holdout(x, y, test_fraction=args.test_fraction, reps=args.reps, seed=args.seed,
                   cfg=cfg, baseline_idx=baseline, threads=args.threads)

    def summary(method, values, s_hat):
        v = np.asarray(values, dtype=np.float64)
        return {"method": method, "reps": len(v), "test_fraction": args.test_fraction,
                "e_test_mean": float(v.mean()), "e_test_sd": float(v.std(ddof=1)) if v.size > 1 else 0.0,
                "s_hat_mean": s_hat, "seed": args.seed}

    rows = [summary("lol", [r.e_lol for r in recs], float(np.mean([r.s_hat for r in recs])))]
    if baseline is not None:
        rows.append(summary("ols_baseline", [r.e_baseline for r in recs], float(len(baseline))))
    cols = ("method", "reps", "test_fraction", "e_test_mean", "e_test_sd", "s_hat_mean", "seed")
    meta = _meta(args, "holdout", config=_config_dict(cfg), target=args.target)
    table = lio.format_table(cols, rows, meta)
    if args.out:
        lio.write_text(args.out, table)
    sys.stdout.write(table)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lolreg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    full = _shared()

    p = sub.add_parser("fit", parents=[full], help="fit a design/response CSV pair")
    p.add_argument("design")
    p.add_argument("response")
    p.add_argument("--predictions", help="also write fitted values to this CSV")
    p.add_argument("--no-timestamp", action="store_true")
    p.set_defaults(func=cmd_fit)

    exp = argparse.ArgumentParser(add_help=False)
    exp.add_argument("--family", default="gaussian")
    exp.add_argument("--n", type=int, default=250)
    exp.add_argument("--p", type=int, default=1000)
    exp.add_argument("--s", type=int, default=10)
    exp.add_argument("--snr", type=float, default=5.0)
    exp.add_argument("--reps", type=_positive_int, default=50)
    exp.add_argument("--dependency", type=float, help="fraction of correlations to overwrite")
    exp.add_argument("--placement", choices=("first", "random"), default="first")
    exp.add_argument("--snr-convention", choices=("variance", "amplitude"), default="variance")
    exp.add_argument("--detail", action="store_true", help="also write per-replication records")

    p = sub.add_parser("simulate", parents=[full, exp], help="one Monte-Carlo experiment")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", parents=[full, exp], help="experiments over a parameter grid")
    p.add_argument("--axis", choices=SWEEP_AXES, required=True)
    p.add_argument("--values", required=True, help="comma-separated grid values")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("augment", parents=[_shared(policy=False)], help="append random noise columns")
    p.add_argument("data")
    p.add_argument("--count", type=_positive_int, default=300)
    p.add_argument("--families", default=",".join(NOISE_FAMILIES))
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("coherence", parents=[_shared(policy=False)], help="coherence and leader capacity")
    p.add_argument("design")
    p.set_defaults(func=cmd_coherence)

    p = sub.add_parser("holdout", parents=[full], help="repeated train/test evaluation on a data CSV")
    p.add_argument("data")
    p.add_argument("--target", required=True)
    p.add_argument("--test-fraction", type=float, default=0.25)
    p.add_argument("--reps", type=_positive_int, default=100)
    p.add_argument("--baseline-cols")
    p.set_defaults(func=cmd_holdout)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (SingularGramError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
