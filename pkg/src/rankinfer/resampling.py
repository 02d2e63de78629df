"""Bootstrap ensembles of the root ``sqrt(n) (Pi* - Pi_hat)``.

Data enter as per-record matrix contributions of shape ``(n, m, k)`` whose
average is the estimator ``Pi_hat`` (for linear IV, contribution ``i`` is
``V_i Z_i^T``). All schemes reduce to a matrix of integer resampling counts
``(B, n)``; the root of draw ``b`` is ``(counts_b - 1) @ C / sqrt(n)``.

Draws are generated in fixed-size blocks, each from its own counter-based
stream keyed by ``(seed, block)``, so an ensemble is bitwise identical for
any worker count and the first ``B`` draws do not depend on the total.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from rankinfer._rng import max_workers, stream
from rankinfer.errors import InsufficientData, InvalidArgument, InvalidInput

BLOCK_DRAWS = 32

SchemeKind = Literal["empirical", "cluster", "circular_block"]


@dataclass(frozen=True)
class Scheme:
    kind: SchemeKind
    block_size: int | None = None
    cluster_ids: tuple | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.kind not in ("empirical", "cluster", "circular_block"):
            raise InvalidArgument(f"unknown scheme {self.kind!r}")
        if self.kind == "circular_block" and (self.block_size is None or self.block_size < 1):
            raise InvalidArgument("circular block scheme needs block_size >= 1")
        if self.kind == "cluster" and self.cluster_ids is None:
            raise InvalidArgument("cluster scheme needs cluster_ids")


@dataclass(frozen=True)
class BootstrapEnsemble:
    """``B`` bootstrap roots stacked as ``draws[b]`` of shape ``(m, k)``."""

    draws: NDArray[np.float64]
    scheme: Scheme
    seed: int

    def __post_init__(self) -> None:
        if self.draws.ndim != 3 or self.draws.shape[0] < 1:
            raise InvalidArgument("ensemble needs at least one (m, k) draw")
        if not np.all(np.isfinite(self.draws)):
            raise InvalidInput("ensemble contains non-finite draws")
        self.draws.setflags(write=False)

    @property
    def B(self) -> int:
        return self.draws.shape[0]


def _as_contributions(contributions: ArrayLike) -> NDArray[np.float64]:
    c = np.asarray(contributions, dtype=np.float64)
    if c.ndim != 3:
        raise InvalidInput(f"contributions must have shape (n, m, k), got {c.shape}")
    if not np.all(np.isfinite(c)):
        raise InvalidInput("contributions contain non-finite values")
    return c


def _count_rows(indices: NDArray[np.int64], n: int) -> NDArray[np.float64]:
    rows = indices.shape[0]
    flat = (indices + (np.arange(rows) * n)[:, None]).ravel()
    return np.bincount(flat, minlength=rows * n).reshape(rows, n).astype(np.float64)


def _generate_counts(
    block_counts: Callable[[np.random.Generator, int], NDArray[np.float64]],
    B: int,
    seed: int,
    workers: int | None,
) -> NDArray[np.float64]:
    if B < 1:
        raise InvalidArgument(f"B must be at least 1, got {B}")
    sizes = [min(BLOCK_DRAWS, B - start) for start in range(0, B, BLOCK_DRAWS)]

    def one(block: int) -> NDArray[np.float64]:
        return block_counts(stream(seed, block), sizes[block])

    nw = max_workers(workers if workers is not None else 1)
    if nw == 1 or len(sizes) == 1:
        parts = [one(b) for b in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=nw) as pool:
            parts = list(pool.map(one, range(len(sizes))))
    return np.concatenate(parts, axis=0)


def _roots(counts: NDArray[np.float64], contrib: NDArray[np.float64], n_obs: int) -> NDArray[np.float64]:
    """``sqrt(n) (Pi* - Pi_hat)`` for unit-sum-centered counts."""
    g, m, k = contrib.shape
    flat = contrib.reshape(g, m * k)
    return ((counts - 1.0) @ flat / np.sqrt(n_obs)).reshape(-1, m, k)


def multinomial_counts(rng: np.random.Generator, rows: int, n: int) -> NDArray[np.float64]:
    """Multinomial(n; 1/n, ..., 1/n) counts from ``n`` uniform category draws per row."""
    return _count_rows(rng.integers(0, n, size=(rows, n)), n)


def circular_block_counts(rng: np.random.Generator, rows: int, n: int, block_size: int) -> NDArray[np.float64]:
    """Counts from ``ceil(n / b)`` circular blocks truncated to ``n`` observations."""
    n_blocks = -(-n // block_size)
    starts = rng.integers(0, n, size=(rows, n_blocks))
    idx = (starts[:, :, None] + np.arange(block_size)).reshape(rows, -1)[:, :n] % n
    return _count_rows(idx, n)


def draw_empirical(contributions: ArrayLike, B: int, seed: int, workers: int | None = None) -> BootstrapEnsemble:
    """Efron's nonparametric bootstrap over i.i.d. records."""
    c = _as_contributions(contributions)
    n = c.shape[0]
    if n < 2:
        raise InsufficientData(f"need at least 2 observations, got {n}")
    counts = _generate_counts(lambda rng, rows: multinomial_counts(rng, rows, n), B, seed, workers)
    return BootstrapEnsemble(_roots(counts, c, n), Scheme("empirical"), seed)


def cluster_sums(contributions: ArrayLike, cluster_ids: Sequence) -> tuple[NDArray[np.float64], NDArray[np.int64], list]:
    """Per-cluster sums of contributions, sizes, and labels in first-appearance order."""
    c = _as_contributions(contributions)
    ids = list(cluster_ids)
    if len(ids) != c.shape[0]:
        raise InvalidArgument(f"{len(ids)} cluster ids for {c.shape[0]} records")
    labels: dict = {}
    codes = np.fromiter((labels.setdefault(x, len(labels)) for x in ids), dtype=np.int64, count=len(ids))
    G = len(labels)
    m, k = c.shape[1:]
    sums = np.zeros((G, m * k))
    np.add.at(sums, codes, c.reshape(-1, m * k))
    sizes = np.bincount(codes, minlength=G)
    return sums.reshape(G, m, k), sizes, list(labels)


def draw_cluster(
    contributions: ArrayLike, cluster_ids: Sequence, B: int, seed: int, workers: int | None = None
) -> BootstrapEnsemble:
    """Pairs cluster bootstrap: resample whole clusters with replacement.

    Draw ``b`` is ``n^{-1/2} sum_g W_gb (S_g - n_g Pi_hat)`` with ``S_g`` the
    cluster sum, ``n_g`` its size and ``W_b ~ Multinomial(G; 1/G, ...)``.
    """
    c = _as_contributions(contributions)
    sums, sizes, _ = cluster_sums(c, cluster_ids)
    G = sums.shape[0]
    if G < 2:
        raise InsufficientData(f"need at least 2 clusters, got {G}")
    n = c.shape[0]
    pi_hat = c.mean(axis=0)
    centered = sums - sizes[:, None, None] * pi_hat
    counts = _generate_counts(lambda rng, rows: multinomial_counts(rng, rows, G), B, seed, workers)
    m, k = pi_hat.shape
    draws = (counts @ centered.reshape(G, m * k) / np.sqrt(n)).reshape(-1, m, k)
    return BootstrapEnsemble(draws, Scheme("cluster", cluster_ids=tuple(cluster_ids)), seed)


def draw_circular_block(
    contributions: ArrayLike, block_size: int, B: int, seed: int, workers: int | None = None
) -> BootstrapEnsemble:
    """Circular block bootstrap (wraparound blocks of fixed length).

    The root is centered at the full-sample estimate ``Pi_hat``.
    """
    c = _as_contributions(contributions)
    n = c.shape[0]
    if not 1 <= block_size <= n:
        raise InvalidArgument(f"block_size must lie in [1, {n}], got {block_size}")
    counts = _generate_counts(
        lambda rng, rows: circular_block_counts(rng, rows, n, block_size), B, seed, workers
    )
    return BootstrapEnsemble(_roots(counts, c, n), Scheme("circular_block", block_size=block_size), seed)


def draw(contributions: ArrayLike, scheme: Scheme, B: int, seed: int, workers: int | None = None) -> BootstrapEnsemble:
    """Dispatch on ``scheme.kind``."""
    if scheme.kind == "empirical":
        return draw_empirical(contributions, B, seed, workers)
    if scheme.kind == "cluster":
        return draw_cluster(contributions, scheme.cluster_ids, B, seed, workers)
    return draw_circular_block(contributions, scheme.block_size, B, seed, workers)
