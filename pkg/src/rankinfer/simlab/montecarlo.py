"""Deterministic Monte Carlo over replications.

Replication ``i`` of a cell is seeded by ``derive_seed(master, design, i)``
and its outcome never depends on which worker ran it, so tables are
identical for any worker count.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from rankinfer._rng import derive_seed, max_workers
from rankinfer.derivatives import DerivativeEstimator, threshold_rank
from rankinfer.errors import InvalidArgument, RankInferError, StepFailure
from rankinfer.rank_estimation import (
    SequentialConfig,
    cf_engine,
    kp_engine,
    sequential_estimate,
    two_step_test,
)
from rankinfer.rank_tests import TestResult, cf_one_step, kp_m_test, kp_test
from rankinfer.resampling import draw
from rankinfer.simlab.designs import Design
from rankinfer.spectral import MatrixEstimate
from rankinfer.tuning import KappaRule

METHODS = ("cf-a", "cf-n", "cf-t", "kp", "kp-m")


@dataclass(frozen=True)
class Context:
    """Everything a method needs from one simulated dataset."""

    est: MatrixEstimate
    contributions: np.ndarray
    design: Design
    B: int
    boot_seed: int
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def ensemble(self):
        if "ensemble" not in self._cache:
            self._cache["ensemble"] = draw(
                self.contributions, self.design.scheme(), self.B, self.boot_seed, workers=1
            )
        return self._cache["ensemble"]

    @property
    def omega(self):
        if "omega" not in self._cache:
            self._cache["omega"] = self.design.covariance(self.contributions)
        return self._cache["omega"]


@dataclass(frozen=True)
class MethodSpec:
    """A test and its tuning: ``kappa`` for CF-A/CF-N, ``beta_ratio`` (beta/alpha) for CF-T.

    ``custom`` may supply any ``(Context, r, alpha) -> TestResult`` callable.
    """

    name: str
    kappa: KappaRule | None = None
    beta_ratio: float | None = None
    custom: Callable[[Context, int, float], TestResult] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.custom is None and self.name not in METHODS:
            raise InvalidArgument(f"unknown method {self.name!r}")
        if self.name in ("cf-a", "cf-n") and self.kappa is None:
            raise InvalidArgument(f"{self.name} needs a kappa rule")
        if self.name == "cf-t" and not (self.beta_ratio and 0 < self.beta_ratio < 1):
            raise InvalidArgument("cf-t needs beta_ratio in (0, 1)")

    @property
    def tuning(self) -> str:
        if self.kappa is not None:
            return self.kappa.label
        if self.beta_ratio is not None:
            inv = 1.0 / self.beta_ratio
            return f"alpha/{inv:g}" if abs(inv - round(inv)) < 1e-9 else f"alpha*{self.beta_ratio:g}"
        return ""

    def run(self, ctx: Context, r: int, alpha: float) -> TestResult:
        if self.custom is not None:
            return self.custom(ctx, r, alpha)
        n = ctx.design.n
        if self.name in ("cf-a", "cf-n"):
            kind = "analytic" if self.name == "cf-a" else "numerical"
            return cf_one_step(
                ctx.est, ctx.ensemble, r, alpha, DerivativeEstimator(kind, self.kappa(n), r)
            )
        if self.name == "cf-t":
            beta = alpha * self.beta_ratio
            return two_step_test(
                ctx.est, ctx.ensemble, r, alpha, beta, kp_engine(ctx.est, ctx.omega)
            )
        if self.name == "kp":
            return kp_test(ctx.est, ctx.omega, r, alpha)
        return kp_m_test(ctx.est, ctx.omega, r, alpha)


def make_context(design: Design, B: int, rep_seed: int) -> Context:
    c = design.contributions(derive_seed(rep_seed, "data"))
    est = MatrixEstimate.from_mean(c.mean(axis=0), design.n)
    return Context(est, c, design, B, derive_seed(rep_seed, "boot"))


def replication_seed(master: int, design: Design, rep: int) -> int:
    return derive_seed(master, design, rep)


# --------------------------------------------------------------------------
# rejection tables
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Row:
    design: str
    n: int
    delta: float
    method: str
    tuning: str
    rate: float
    se: float
    R: int


@dataclass(frozen=True)
class RejectionTable:
    rows: tuple[Row, ...] = ()

    COLUMNS = ("design", "n", "delta", "method", "tuning", "rate", "se", "R")

    def lookup(self, method: str, tuning: str | None = None) -> Row:
        for row in self.rows:
            if row.method == method and (tuning is None or row.tuning == tuning):
                return row
        raise KeyError((method, tuning))

    def __add__(self, other: RejectionTable) -> RejectionTable:
        return RejectionTable(self.rows + other.rows)


def _run_chunk(design, methods, r, alpha, B, master, reps) -> list[tuple[bool, ...]]:
    out = []
    for rep in reps:
        try:
            ctx = make_context(design, B, replication_seed(master, design, rep))
            out.append(tuple(bool(m.run(ctx, r, alpha).reject) for m in methods))
        except RankInferError as exc:
            raise StepFailure(f"replication {rep} failed: {exc}", step=rep) from exc
    return out


def _parallel_map(fn, R: int, workers: int | None) -> list:
    nw = max_workers(workers if workers is not None else 1)
    if nw == 1:
        return fn(range(R))
    bounds = np.linspace(0, R, min(R, 4 * nw) + 1).astype(int)
    chunks = [range(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=nw) as pool:
        parts = list(pool.map(fn, chunks))
    return [x for part in parts for x in part]


def run_monte_carlo(
    design: Design,
    methods: Sequence[MethodSpec],
    r: int,
    R: int,
    B: int = 500,
    seed: int = 0,
    alpha: float = 0.05,
    workers: int | None = None,
) -> RejectionTable:
    """Rejection frequencies of ``methods`` for ``H0: rank <= r`` over ``R`` replications.

    All methods in a replication share the same dataset and bootstrap draws.
    """
    if R < 1:
        raise InvalidArgument(f"R must be at least 1, got {R}")
    methods = tuple(methods)
    fn = partial(_run_chunk, design, methods, r, alpha, B, seed)
    decisions = np.array(_parallel_map(fn, R, workers), dtype=bool).reshape(R, len(methods))
    rows = []
    for j, m in enumerate(methods):
        p = float(decisions[:, j].mean())
        rows.append(
            Row(
                design=f"{design.label}[r={r}]",
                n=design.n,
                delta=float(design.delta),
                method=m.name,
                tuning=m.tuning,
                rate=p,
                se=math.sqrt(p * (1.0 - p) / R),
                R=R,
            )
        )
    return RejectionTable(tuple(rows))


# --------------------------------------------------------------------------
# rank distributions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EstimatorSpec:
    """Rank estimator: sequential ``cf-a``/``cf-n``/``kp`` at ``alpha``, or ``threshold``.

    ``threshold`` is the singular-value count ``#{j <= r: sigma_j >= kappa}``
    with ``r = k - 1``.
    """

    name: str
    kappa: KappaRule | None = None
    alpha: float = 0.05
    custom: Callable[[Context], int] | None = field(default=None, compare=False)

    @property
    def label(self) -> str:
        parts = [self.name]
        if self.kappa is not None:
            parts.append(self.kappa.label)
        if self.name != "threshold":
            parts.append(f"alpha={self.alpha:g}")
        return ",".join(parts)

    def estimate(self, ctx: Context) -> int:
        if self.custom is not None:
            return int(self.custom(ctx))
        k = ctx.est.shape[1]
        n = ctx.design.n
        if self.name == "threshold":
            return threshold_rank(ctx.est.values, self.kappa(n), k - 1)
        if self.name == "kp":
            engine = kp_engine(ctx.est, ctx.omega)
        elif self.name in ("cf-a", "cf-n"):
            kind = "analytic" if self.name == "cf-a" else "numerical"
            engine = cf_engine(ctx.est, ctx.ensemble, kind, self.kappa(n))
        else:
            raise InvalidArgument(f"unknown estimator {self.name!r}")
        return sequential_estimate(SequentialConfig(engine, self.alpha, k))[0]


@dataclass(frozen=True)
class RankHistogram:
    design: str
    n: int
    delta: float
    estimator: str
    counts: tuple[int, ...]
    R: int

    COLUMNS = ("design", "n", "delta", "estimator", "rank", "percent", "count", "R")

    @property
    def percentages(self) -> tuple[float, ...]:
        return tuple(100.0 * c / self.R for c in self.counts)


def _rank_chunk(design, estimator, B, master, reps) -> list[int]:
    out = []
    for rep in reps:
        ctx = make_context(design, B, replication_seed(master, design, rep))
        out.append(estimator.estimate(ctx))
    return out


def rank_distribution(
    design: Design,
    estimator: EstimatorSpec,
    R: int,
    seed: int = 0,
    B: int = 500,
    workers: int | None = None,
) -> RankHistogram:
    """Empirical distribution of a rank estimator over ``0..k``."""
    if R < 1:
        raise InvalidArgument(f"R must be at least 1, got {R}")
    k = design.dims[1]
    ranks = _parallel_map(partial(_rank_chunk, design, estimator, B, seed), R, workers)
    counts = np.bincount(np.asarray(ranks, dtype=np.int64), minlength=k + 1)
    return RankHistogram(design.label, design.n, float(design.delta), estimator.label,
                         tuple(int(c) for c in counts), R)
