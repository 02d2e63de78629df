"""Command-line rank test on ``E[V Z^T]`` estimated from a CSV file.

Exit codes: 0 success, 2 usage error, 3 numerical/data failure,
4 malformed CSV row.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from rankinfer.derivatives import DerivativeEstimator
from rankinfer.errors import InvalidArgument, RankInferError
from rankinfer.rank_estimation import kp_engine, two_step_test
from rankinfer.rank_tests import (
    TestResult,
    cf_one_step,
    cov_cluster,
    cov_hacc_one_lag,
    cov_iid,
    kp_m_test,
    kp_test,
)
from rankinfer.resampling import Scheme, draw
from rankinfer.spectral import MatrixEstimate, singular_values
from rankinfer.tuning import KappaRule

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_CSV = 0, 2, 3, 4
METHODS = ("cf-t", "cf-a", "cf-n", "kp", "kp-m")
FIELDS = (
    "method", "r", "statistic", "critical_value", "p_value", "reject", "alpha", "beta",
    "kappa", "estimated_rank", "B", "seed", "scheme", "singular_values", "flags",
)


class MalformedRow(Exception):
    def __init__(self, row: int, reason: str):
        super().__init__(f"row {row}: {reason}")
        self.row = row


@dataclass(frozen=True)
class RunConfig:
    input: Path
    v: tuple[str, ...]
    z: tuple[str, ...]
    cluster: str | None
    block_size: int | None
    method: str
    r: int | None
    alpha: float
    beta: float
    kappa: KappaRule
    B: int
    seed: int
    format: str
    output: Path | None
    workers: int | None

    @property
    def scheme_kind(self) -> str:
        if self.cluster is not None:
            return "cluster"
        return "circular_block" if self.block_size is not None else "empirical"


def _names(text: str) -> tuple[str, ...]:
    names = tuple(s.strip() for s in text.split(",") if s.strip())
    if not names:
        raise argparse.ArgumentTypeError("expected a comma-separated list of column names")
    return names


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rankinfer",
        description="Bootstrap test of H0: rank(E[V Z^T]) <= r from a CSV file.",
    )
    p.add_argument("--input", required=True, type=Path, help="CSV file with a header row")
    p.add_argument("--v", required=True, type=_names, help="columns of V (m names)")
    p.add_argument("--z", required=True, type=_names, help="columns of Z (k names, k <= m)")
    p.add_argument("--cluster", help="cluster id column; enables the pairs cluster bootstrap")
    p.add_argument("--block-size", type=int, help="rows are time ordered; circular block length")
    p.add_argument("--method", choices=METHODS, default="cf-t")
    p.add_argument("--r", type=int, help="hypothesized rank (default k - 1)")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--beta", type=float, help="first-step level for cf-t (default alpha/15)")
    p.add_argument("--kappa", default="n^-1/4", help="e.g. n^-1/4, 1.5n^-1/3 or 0.1")
    p.add_argument("--B", type=int, default=500, help="bootstrap draws")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", type=Path, help="write here instead of stdout")
    p.add_argument("--workers", type=int, help="threads for bootstrap draws")
    return p


def parse_args(argv: list[str] | None = None) -> RunConfig:
    """Parse and validate; exits with status 2 on usage errors."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    if len(ns.v) < len(ns.z):
        parser.error(f"--v needs at least as many columns as --z ({len(ns.v)} < {len(ns.z)})")
    if ns.cluster is not None and ns.block_size is not None:
        parser.error("choose at most one of --cluster and --block-size")
    if ns.block_size is not None and ns.block_size < 1:
        parser.error("--block-size must be positive")
    if not 0.0 < ns.alpha < 1.0:
        parser.error("--alpha must lie in (0, 1)")
    beta = ns.alpha / 15.0 if ns.beta is None else ns.beta
    if ns.method == "cf-t" and not 0.0 < beta < ns.alpha:
        parser.error("--beta must lie in (0, alpha)")
    if ns.r is not None and not 0 <= ns.r < len(ns.z):
        parser.error(f"--r must lie in [0, {len(ns.z) - 1}]")
    if ns.B < 1:
        parser.error("--B must be positive")
    if ns.seed < 0:
        parser.error("--seed must be nonnegative")
    try:
        kappa = KappaRule.parse(ns.kappa)
    except InvalidArgument as exc:
        parser.error(str(exc))
    return RunConfig(
        input=ns.input, v=ns.v, z=ns.z, cluster=ns.cluster, block_size=ns.block_size,
        method=ns.method, r=ns.r, alpha=ns.alpha, beta=beta, kappa=kappa, B=ns.B,
        seed=ns.seed, format=ns.format, output=ns.output, workers=ns.workers,
    )


def read_columns(path: Path, v: tuple[str, ...], z: tuple[str, ...], cluster: str | None):
    """Read ``V``, ``Z`` and cluster ids in file order.

    Raises :class:`MalformedRow` with the 1-based line number of the bad row.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedRow(1, "missing header row") from None
        header = [h.strip() for h in header]
        missing = [c for c in (*v, *z, *([cluster] if cluster else [])) if c not in header]
        if missing:
            raise MalformedRow(1, f"header lacks columns {missing}")
        iv = [header.index(c) for c in v]
        iz = [header.index(c) for c in z]
        ic = header.index(cluster) if cluster else None
        V, Z, ids = [], [], []
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise MalformedRow(line, f"expected {len(header)} fields, got {len(row)}")
            try:
                vals_v = [float(row[i]) for i in iv]
                vals_z = [float(row[i]) for i in iz]
            except ValueError as exc:
                raise MalformedRow(line, str(exc)) from None
            if not all(np.isfinite(vals_v + vals_z)):
                raise MalformedRow(line, "non-finite value")
            V.append(vals_v)
            Z.append(vals_z)
            if ic is not None:
                ids.append(row[ic])
    m, k = len(v), len(z)
    return (
        np.asarray(V, dtype=np.float64).reshape(-1, m),
        np.asarray(Z, dtype=np.float64).reshape(-1, k),
        ids if cluster else None,
    )


def execute(config: RunConfig, V: np.ndarray, Z: np.ndarray, ids) -> dict:
    """Run the configured test and return the result document."""
    n, k = Z.shape
    if n < 2:
        raise InvalidArgument(f"need at least 2 rows, got {n}")
    contrib = V[:, :, None] * Z[:, None, :]
    est = MatrixEstimate.from_mean(contrib.mean(axis=0), n)
    r = k - 1 if config.r is None else config.r
    kind = config.scheme_kind
    scheme = Scheme(kind, block_size=config.block_size, cluster_ids=tuple(ids) if ids else None)

    def omega():
        if kind == "cluster":
            return cov_cluster(contrib, ids)
        return cov_hacc_one_lag(contrib) if kind == "circular_block" else cov_iid(contrib)

    def ensemble():
        return draw(contrib, scheme, config.B, config.seed, config.workers)

    kappa = None
    beta = None
    if config.method == "kp":
        res: TestResult = kp_test(est, omega(), r, config.alpha)
    elif config.method == "kp-m":
        res = kp_m_test(est, omega(), r, config.alpha)
    elif config.method == "cf-t":
        beta = config.beta
        res = two_step_test(est, ensemble(), r, config.alpha, beta, kp_engine(est, omega()))
    else:
        kappa = config.kappa(n)
        kind_ = "analytic" if config.method == "cf-a" else "numerical"
        res = cf_one_step(est, ensemble(), r, config.alpha, DerivativeEstimator(kind_, kappa, r))

    bootstrap = config.method in ("cf-t", "cf-a", "cf-n")
    return {
        "method": res.method,
        "r": r,
        "statistic": res.statistic,
        "critical_value": res.critical_value,
        "p_value": res.p_value,
        "reject": res.reject,
        "alpha": config.alpha,
        "beta": beta,
        "kappa": kappa,
        "estimated_rank": res.estimated_rank,
        "B": config.B if bootstrap else None,
        "seed": config.seed,
        "scheme": kind,
        "singular_values": [float(s) for s in singular_values(est.values)],
        "flags": list(res.flags),
    }


def render(doc: dict, fmt: str) -> bytes:
    if fmt == "json":
        return (json.dumps({f: doc[f] for f in FIELDS}, indent=2) + "\n").encode("utf-8")

    def cell(x):
        if x is None:
            return ""
        if isinstance(x, bool):
            return "true" if x else "false"
        if isinstance(x, list):
            return ";".join(repr(v) if isinstance(v, float) else str(v) for v in x)
        return repr(x) if isinstance(x, float) else str(x)

    return (",".join(FIELDS) + "\n" + ",".join(cell(doc[f]) for f in FIELDS) + "\n").encode()


def main(argv: list[str] | None = None) -> int:
    config = parse_args(argv)
    try:
        V, Z, ids = read_columns(config.input, config.v, config.z, config.cluster)
    except MalformedRow as exc:
        print(f"rankinfer: malformed CSV, {exc}", file=sys.stderr)
        return EXIT_CSV
    except (OSError, UnicodeDecodeError) as exc:
        print(f"rankinfer: cannot read {config.input}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        doc = execute(config, V, Z, ids)
    except (RankInferError, np.linalg.LinAlgError) as exc:
        print(f"rankinfer: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    data = render(doc, config.format)
    if config.output is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        config.output.write_bytes(data)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
