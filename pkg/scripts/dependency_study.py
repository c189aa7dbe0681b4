"""Prediction error as a growing share of the support correlations is made strong.

    python scripts/dependency_study.py --reps 50 --fractions 0,0.05,0.1,0.2
"""

import argparse
from dataclasses import replace

from lolreg.estimator import LolConfig
from lolreg.io import format_table
from lolreg.simulate import RNG_ALGORITHM, Dependency, ExperimentSpec, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=50)
    ap.add_argument("--fractions", default="0,0.05,0.1,0.2")
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--threads", type=int, default=4)
    args = ap.parse_args()

    # the same seed for every fraction, so each point shares designs and noise
    base = ExperimentSpec(n=250, p=1000, s=10, snr=5.0, reps=args.reps, seed=args.seed,
                          config=LolConfig(refit=True))
    rows = []
    for f in (float(v) for v in args.fractions.split(",")):
        spec = replace(base, dependency=Dependency(f) if f > 0 else None)
        res = run_experiment(spec, args.threads)
        rows.append({"fraction": f, "tau_mean": res.mean("tau"), "e_y_obs_mean": res.mean("e_y_observed"),
                     "e_y_obs_sd": res.sd("e_y_observed"), "s_hat_mean": res.mean("s_hat"),
                     "failures": res.failures})
    cols = ("fraction", "tau_mean", "e_y_obs_mean", "e_y_obs_sd", "s_hat_mean", "failures")
    print(format_table(cols, rows, {"seed": args.seed, "reps": args.reps, "rng": RNG_ALGORITHM}), end="")


if __name__ == "__main__":
    main()
