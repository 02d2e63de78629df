"""Data-generating processes used in the simulation studies.

Every generator is a pure function of its parameters and a 64-bit seed.
Row-vector convention: ``Z_i = Pi0^T V_i + u_i`` is stored as
``Z[i] = V[i] @ Pi0 + u[i]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from rankinfer._rng import stream
from rankinfer.errors import InvalidArgument
from rankinfer.rank_tests import VecCovariance, cov_hacc_one_lag, cov_iid
from rankinfer.resampling import Scheme

_R = 0.9 * np.sqrt(5.0)
OMEGA_1 = np.eye(4)
OMEGA_2 = np.array(
    [
        [1.0, 0.0, 0.0, -_R],
        [0.0, 1.0, _R, 0.0],
        [0.0, _R, 5.0, 0.0],
        [-_R, 0.0, 0.0, 5.0],
    ]
)
OMEGAS = {1: OMEGA_1, 2: OMEGA_2}


def sym_sqrt(omega: ArrayLike) -> NDArray[np.float64]:
    """Symmetric square root of a positive definite matrix.

    Raises
    ------
    InvalidArgument
        If ``omega`` is not symmetric positive definite.
    """
    w = np.asarray(omega, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != w.shape[1] or not np.allclose(w, w.T, atol=1e-12):
        raise InvalidArgument("omega must be a symmetric square matrix")
    evals, evecs = np.linalg.eigh(w)
    if evals[0] <= 0:
        raise InvalidArgument(f"omega is not positive definite (min eigenvalue {evals[0]:.3g})")
    return (evecs * np.sqrt(evals)) @ evecs.T


def outer_contributions(V: NDArray[np.float64], Z: NDArray[np.float64]) -> NDArray[np.float64]:
    """Per-record ``V_i Z_i^T``, shape ``(n, m, k)``."""
    return V[:, :, None] * Z[:, None, :]


def motivation_pi(delta: float, d: int) -> NDArray[np.float64]:
    return np.diag(np.r_[np.ones(6 - d), np.zeros(d)]) + delta * np.eye(6)


def gen_motivation(delta: float, d: int, n: int, seed: int) -> tuple[NDArray, NDArray]:
    """i.i.d. ``(V, Z)`` with ``V, u ~ N(0, I_6)`` and ``Pi0 = diag(1_{6-d}, 0_d) + delta I``."""
    if not 1 <= d <= 6:
        raise InvalidArgument(f"d must lie in 1..6, got {d}")
    if delta < 0:
        raise InvalidArgument(f"delta must be nonnegative, got {delta}")
    rng = stream(seed)
    V = rng.standard_normal((n, 6))
    u = rng.standard_normal((n, 6))
    return V, V @ motivation_pi(delta, d) + u


def gaussian_direct_mean(omega: ArrayLike, delta: float) -> NDArray[np.float64]:
    """``Pi0`` with ``vec(Pi0) = delta Omega^{1/2} vec(I_2)``."""
    v = delta * sym_sqrt(omega) @ np.array([1.0, 0.0, 0.0, 1.0])
    return v.reshape(2, 2, order="F")


def gen_gaussian_direct(omega: ArrayLike, delta: float, n: int, seed: int) -> NDArray[np.float64]:
    """i.i.d. ``2 x 2`` matrices with ``vec(Z) ~ N(delta Omega^{1/2} vec(I_2), Omega)``."""
    if delta < 0:
        raise InvalidArgument(f"delta must be nonnegative, got {delta}")
    root = sym_sqrt(omega)
    rng = stream(seed)
    e = rng.standard_normal((n, 4))
    vecs = e @ root + delta * root @ np.array([1.0, 0.0, 0.0, 1.0])
    # column-major vec per record
    return vecs.reshape(n, 2, 2).transpose(0, 2, 1).copy()


def hetero_ma_pi(delta: float) -> NDArray[np.float64]:
    return np.diag([1.0, 1.0, 0.0, 0.0]) + delta * np.eye(4)


def gen_hetero_ma(delta: float, n: int, seed: int, return_u: bool = False):
    """Time series ``Z_t = Pi0^T V_t + V_{1t} u_t``, ``u_t = e_t - (1/4) 1 1^T e_{t-1}``."""
    if delta < 0:
        raise InvalidArgument(f"delta must be nonnegative, got {delta}")
    rng = stream(seed)
    V = rng.standard_normal((n, 4))
    eps = rng.standard_normal((n + 1, 4))
    u = eps[1:] - 0.25 * eps[:-1].sum(axis=1, keepdims=True)
    Z = V @ hetero_ma_pi(delta) + V[:, :1] * u
    return (V, Z, u) if return_u else (V, Z)


def gen_linear_gaussian(pi0: ArrayLike, n: int, seed: int) -> tuple[NDArray, NDArray]:
    """i.i.d. ``Z = Pi0^T V + u`` with ``V ~ N(0, I_m)``, ``u ~ N(0, I_k)``."""
    p = np.asarray(pi0, dtype=np.float64)
    m, k = p.shape
    rng = stream(seed)
    V = rng.standard_normal((n, m))
    u = rng.standard_normal((n, k))
    return V, V @ p + u


DesignKind = Literal["motivation", "gaussian_direct", "hetero_ma", "linear_gaussian"]


@dataclass(frozen=True)
class Design:
    """A simulation design; ``contributions(seed)`` yields one dataset."""

    kind: DesignKind
    n: int
    delta: float = 0.0
    d: int | None = None
    omega_id: int | None = None
    pi0: tuple[tuple[float, ...], ...] | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.n < 2:
            raise InvalidArgument(f"n must be at least 2, got {self.n}")
        if self.delta < 0:
            raise InvalidArgument(f"delta must be nonnegative, got {self.delta}")
        if self.kind == "motivation" and (self.d is None or not 1 <= self.d <= 6):
            raise InvalidArgument("motivation design needs d in 1..6")
        if self.kind == "gaussian_direct" and self.omega_id not in OMEGAS:
            raise InvalidArgument("gaussian_direct design needs omega_id in {1, 2}")
        if self.kind == "linear_gaussian" and self.pi0 is None:
            raise InvalidArgument("linear_gaussian design needs pi0")
        if self.kind not in ("motivation", "gaussian_direct", "hetero_ma", "linear_gaussian"):
            raise InvalidArgument(f"unknown design kind {self.kind!r}")

    @classmethod
    def linear(cls, pi0: ArrayLike, n: int) -> Design:
        p = np.asarray(pi0, dtype=np.float64)
        return cls("linear_gaussian", n, pi0=tuple(map(tuple, p.tolist())))

    @property
    def dims(self) -> tuple[int, int]:
        return {
            "motivation": (6, 6),
            "gaussian_direct": (2, 2),
            "hetero_ma": (4, 4),
        }.get(self.kind) or np.asarray(self.pi0).shape

    @property
    def label(self) -> str:
        if self.kind == "motivation":
            return f"motivation(d={self.d})"
        if self.kind == "gaussian_direct":
            return f"gaussian_direct(omega={self.omega_id})"
        if self.kind == "linear_gaussian":
            m, k = self.dims
            return f"linear_gaussian({m}x{k},rank={np.linalg.matrix_rank(np.asarray(self.pi0))})"
        return "hetero_ma"

    @property
    def time_ordered(self) -> bool:
        return self.kind == "hetero_ma"

    def true_pi(self) -> NDArray[np.float64]:
        if self.kind == "motivation":
            return motivation_pi(self.delta, self.d)
        if self.kind == "gaussian_direct":
            return gaussian_direct_mean(OMEGAS[self.omega_id], self.delta)
        if self.kind == "hetero_ma":
            return hetero_ma_pi(self.delta)
        return np.asarray(self.pi0, dtype=np.float64)

    def contributions(self, seed: int) -> NDArray[np.float64]:
        if self.kind == "motivation":
            return outer_contributions(*gen_motivation(self.delta, self.d, self.n, seed))
        if self.kind == "gaussian_direct":
            return gen_gaussian_direct(OMEGAS[self.omega_id], self.delta, self.n, seed)
        if self.kind == "hetero_ma":
            return outer_contributions(*gen_hetero_ma(self.delta, self.n, seed))
        return outer_contributions(*gen_linear_gaussian(self.true_pi(), self.n, seed))

    def scheme(self) -> Scheme:
        """Circular blocks of length 2 for the serially dependent design, else i.i.d."""
        return Scheme("circular_block", block_size=2) if self.time_ordered else Scheme("empirical")

    def covariance(self, contributions: NDArray[np.float64]) -> VecCovariance:
        return cov_hacc_one_lag(contributions) if self.time_ordered else cov_iid(contributions)
