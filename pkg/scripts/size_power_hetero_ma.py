#!/usr/bin/env python3
"""Rejection rates on the heteroskedastic MA(1) design (block bootstrap, HAC weights)."""

from __future__ import annotations

from _common import parser, write

from rankinfer.simlab import Design, MethodSpec, RejectionTable, run_monte_carlo
from rankinfer.tuning import KappaRule

METHODS = [
    MethodSpec("cf-t", beta_ratio=0.1),
    MethodSpec("cf-a", KappaRule.parse("n^-1/4")),
    MethodSpec("cf-a", KappaRule.parse("n^-1/3")),
    MethodSpec("cf-n", KappaRule.parse("n^-1/4")),
    MethodSpec("cf-n", KappaRule.parse("n^-1/3")),
    MethodSpec("kp-m"),
]


def main() -> None:
    p = parser(__doc__)
    p.add_argument("--ranks", default="2,3")
    p.add_argument("--deltas", default="0,0.5")
    p.add_argument("--ns", default="300,1000")
    args = p.parse_args()
    rows, cell = [], 0
    for r in (int(x) for x in args.ranks.split(",")):
        for delta in (float(x) for x in args.deltas.split(",")):
            for n in (int(x) for x in args.ns.split(",")):
                tab = run_monte_carlo(Design("hetero_ma", n, delta), METHODS, r, R=args.R, B=args.B,
                                      seed=args.seed + cell, workers=args.workers)
                rows.extend(tab.rows)
                cell += 1
    write(RejectionTable(tuple(rows)), args)


if __name__ == "__main__":
    main()
