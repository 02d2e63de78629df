#!/usr/bin/env python3
"""Rejection rates on the 2x2 Gaussian design with rank-1 null, over a delta grid."""

from __future__ import annotations

from _common import parser, write

from rankinfer.simlab import Design, MethodSpec, RejectionTable, run_monte_carlo
from rankinfer.tuning import KappaRule

METHODS = [
    MethodSpec("cf-a", KappaRule.parse("n^-1/4")),
    MethodSpec("cf-n", KappaRule.parse("n^-1/4")),
    MethodSpec("cf-t", beta_ratio=0.1),
    MethodSpec("kp"),
    MethodSpec("kp-m"),
]


def main() -> None:
    p = parser(__doc__, B=1000)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--omega", type=int, choices=(1, 2), default=1)
    p.add_argument("--deltas", default="0,0.02,0.04,0.06,0.08,0.1")
    args = p.parse_args()
    rows = []
    for i, delta in enumerate(float(x) for x in args.deltas.split(",")):
        design = Design("gaussian_direct", args.n, delta, omega_id=args.omega)
        tab = run_monte_carlo(design, METHODS, 1, R=args.R, B=args.B, seed=args.seed + i, workers=args.workers)
        rows.extend(tab.rows)
    write(RejectionTable(tuple(rows)), args)


if __name__ == "__main__":
    main()
