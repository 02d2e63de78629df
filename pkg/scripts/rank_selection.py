#!/usr/bin/env python3
"""Rank-estimator distributions on the 6x6 i.i.d. design, one histogram per (estimator, d)."""

from __future__ import annotations

from _common import parser, write

from rankinfer.simlab import Design, EstimatorSpec, rank_distribution
from rankinfer.tuning import KappaRule


def estimators(names: str):
    table = {
        "cf-a": EstimatorSpec("cf-a", KappaRule.parse("n^-1/4")),
        "cf-n": EstimatorSpec("cf-n", KappaRule.parse("n^-1/4")),
        "kp": EstimatorSpec("kp"),
        "kp-beta": EstimatorSpec("kp", alpha=0.005),
        "threshold": EstimatorSpec("threshold", KappaRule.parse("n^-1/4")),
        "threshold-2/5": EstimatorSpec("threshold", KappaRule.parse("n^-2/5")),
    }
    return [table[x] for x in names.split(",")]


def main() -> None:
    p = parser(__doc__)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--ds", default="1,2,3,4,5,6")
    p.add_argument("--estimators", default="cf-a,kp")
    args = p.parse_args()
    hists = []
    for spec in estimators(args.estimators):
        for d in (int(x) for x in args.ds.split(",")):
            hists.append(rank_distribution(Design("motivation", args.n, args.delta, d=d), spec, R=args.R,
                                           seed=args.seed + d, B=args.B, workers=args.workers))
    write(hists, args)


if __name__ == "__main__":
    main()
