"""Sequential rank estimation over a pluggable per-step test.

An *engine* is any callable ``engine(r, alpha) -> TestResult`` testing
``rank(Pi) <= r`` on data it has already bound. The sequential estimator
returns the first ``r = 0, 1, ...`` that is not rejected (or ``k``).
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np

from rankinfer.derivatives import DerivativeEstimator
from rankinfer.errors import InvalidArgument, RankInferError, StepFailure
from rankinfer.rank_tests import (
    TestResult,
    VecCovariance,
    cf_one_step,
    cf_two_step,
    kp_test,
)
from rankinfer.resampling import BootstrapEnsemble
from rankinfer.spectral import MatrixEstimate

Engine = Callable[[int, float], TestResult]


@dataclass(frozen=True)
class SequentialConfig:
    engine: Engine
    alpha: float
    k: int

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise InvalidArgument(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.k < 1:
            raise InvalidArgument(f"k must be at least 1, got {self.k}")


def sequential_estimate(config: SequentialConfig) -> tuple[int, tuple[TestResult, ...]]:
    """Smallest ``r`` in ``0..k-1`` whose test accepts, or ``k``.

    Returns the estimate together with the results of every step run.
    """
    trail: list[TestResult] = []
    for r in range(config.k):
        try:
            res = config.engine(r, config.alpha)
        except RankInferError as exc:
            raise StepFailure(f"step r={r} failed: {exc}", step=r) from exc
        trail.append(res)
        if not res.reject:
            return r, tuple(trail)
    return config.k, tuple(trail)


def kp_engine(est: MatrixEstimate, omega: VecCovariance) -> Engine:
    return lambda r, alpha: kp_test(est, omega, r, alpha)


def cf_engine(
    est: MatrixEstimate,
    ensemble: BootstrapEnsemble,
    kind: Literal["analytic", "numerical"],
    kappa: float,
) -> Engine:
    """Engine running the one-step bootstrap test with a fixed tuning ``kappa``."""
    return lambda r, alpha: cf_one_step(
        est, ensemble, r, alpha, DerivativeEstimator(kind, kappa, r)
    )


def two_step_test(
    est: MatrixEstimate,
    ensemble: BootstrapEnsemble,
    r: int,
    alpha: float,
    beta: float,
    first_step: Engine,
) -> TestResult:
    """CF-T with the first-step rank from ``first_step`` run sequentially at ``beta``."""
    if not 0.0 < beta < alpha:
        raise InvalidArgument(f"beta must lie in (0, alpha={alpha}), got {beta}")
    rank, _ = sequential_estimate(SequentialConfig(first_step, beta, est.shape[1]))
    return cf_two_step(est, ensemble, r, alpha, beta, rank)


# --------------------------------------------------------------------------
# shrinking significance levels
# --------------------------------------------------------------------------


def check_alpha_rate(
    alpha_n: Callable[[int], float],
    horizon: Sequence[int],
    rate: Callable[[int], float] = np.sqrt,
) -> tuple[str, ...]:
    """Advisory check that ``log(alpha_n) / rate(n)^2`` shrinks toward 0 on ``horizon``.

    Returns warning flags; an empty tuple means no violation was detected.
    The condition is asymptotic, so this can only catch obvious failures.
    """
    ns = sorted(int(n) for n in horizon)
    if len(ns) < 2:
        raise InvalidArgument("horizon needs at least two sample sizes")
    levels = np.array([float(alpha_n(n)) for n in ns])
    flags: list[str] = []
    if np.any(levels <= 0.0) or np.any(levels >= 1.0):
        # typically exp(-n^2) underflowing to 0
        flags.append("alpha_out_of_range_on_horizon")
        return tuple(flags)
    if np.any(np.diff(levels) > 0):
        flags.append("alpha_not_nonincreasing")
    g = np.abs(np.log(levels)) / np.array([float(rate(n)) ** 2 for n in ns])
    if not (g[-1] < g[0] and np.all(np.diff(g) <= 1e-12 * g[0])):
        flags.append("alpha_rate_violation")
    return tuple(flags)


def consistent_estimate(
    engine: Engine,
    k: int,
    alpha_n: Callable[[int], float],
    n: int,
    rate: Callable[[int], float] = np.sqrt,
    horizon: Sequence[int] | None = None,
) -> tuple[int, tuple[str, ...]]:
    """Sequential estimate at the sample-size dependent level ``alpha_n(n)``.

    The rate check runs on ``horizon`` (default: ``n`` up to ``1e6 n``) and
    only produces flags. Gaussianity of the limit is assumed, not checked.
    """
    level = float(alpha_n(n))
    if not 0.0 < level < 1.0:
        raise InvalidArgument(f"alpha_n({n}) = {level} is not in (0, 1)")
    if horizon is None:
        horizon = np.unique(np.geomspace(n, 1e6 * n, 13).astype(np.int64))
    flags = check_alpha_rate(alpha_n, horizon, rate)
    rank, _ = sequential_estimate(SequentialConfig(engine, level, k))
    return rank, flags
