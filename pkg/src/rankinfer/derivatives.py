"""Directional derivatives of ``phi_r`` and their finite-sample estimators.

Under ``rank(Pi) <= r`` the first derivative of ``phi_r`` vanishes and the
second-order directional derivative is

    phi''(M) = sum_{j=r-r0+1}^{k-r0} sigma_j^2(P2^T M Q2),

where ``r0 = rank(Pi)`` and ``P2``, ``Q2`` span the left/right null spaces.
It is quadratic (hence bilinear-representable) only when ``r0 == r``.

Two estimators of ``phi''`` are provided: the *analytic* one plugs in a
thresholded rank and the estimated null-space blocks, the *numerical* one is
a second-order difference quotient with step ``kappa``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from rankinfer.errors import DegenerateSubspace, InvalidArgument
from rankinfer.spectral import (
    RANK_RTOL,
    as_matrix,
    partition,
    phi_r,
    phi_r_batch,
    singular_values,
    svd,
    tail_energy,
)

GAP_RTOL = 1e-8
NULL_ATOL = 1e-12


def _check_r(r: int, k: int) -> None:
    if not 0 <= r <= k - 1:
        raise InvalidArgument(f"r must lie in [0, {k - 1}], got {r}")


def first_derivative(pi: ArrayLike, r: int, M: ArrayLike) -> float:
    """First-order directional derivative of ``phi_r`` at ``pi`` along ``M``.

    Returns exactly 0 when ``phi_r(pi)`` is numerically zero. Otherwise the
    derivative is ``2 tr(Q2^T pi^T M Q2)`` with ``Q2`` the last ``k - r``
    right singular vectors.

    Raises
    ------
    DegenerateSubspace
        If ``sigma_r`` and ``sigma_{r+1}`` are tied (gap below ``1e-8 *
        sigma_1``) while ``phi_r(pi) > 0``. The exception carries the value
        obtained from the returned subspace.
    """
    a = as_matrix(pi)
    d = as_matrix(M)
    if a.shape != d.shape:
        raise InvalidArgument(f"shape mismatch: {a.shape} vs {d.shape}")
    k = a.shape[1]
    _check_r(r, k)
    dec = svd(a)
    s = dec.singular_values
    tail = float(np.sum(s[r:] ** 2))
    if tail < NULL_ATOL or s[r] <= RANK_RTOL * s[0]:
        return 0.0
    q2 = dec.right_vectors[:, r:]
    value = float(2.0 * np.trace(q2.T @ a.T @ d @ q2))
    gap = s[r - 1] - s[r] if r > 0 else np.inf
    if gap < GAP_RTOL * s[0]:
        raise DegenerateSubspace(
            f"sigma_{r} and sigma_{r + 1} tie (gap {gap:.3e}); minimizing subspace "
            "is not unique",
            value=value,
            gap=float(gap),
        )
    return value


def second_derivative_analytic(
    P2: ArrayLike, Q2: ArrayLike, M: ArrayLike, r: int, r0: int
) -> float:
    """Closed-form second derivative given the null-space blocks.

    ``P2`` is ``m x (m - r0)`` and ``Q2`` is ``k x (k - r0)``, both with
    orthonormal columns.
    """
    if r0 > r:
        raise InvalidArgument(f"r0={r0} exceeds r={r}")
    if r0 < 0:
        raise InvalidArgument(f"r0 must be nonnegative, got {r0}")
    p2 = np.asarray(P2, dtype=np.float64)
    q2 = np.asarray(Q2, dtype=np.float64)
    h = p2.T @ np.asarray(M, dtype=np.float64) @ q2
    return float(tail_energy(singular_values(h), r - r0))


def second_derivative_analytic_batch(
    P2: NDArray[np.float64], Q2: NDArray[np.float64], draws: NDArray[np.float64], r: int, r0: int
) -> NDArray[np.float64]:
    """:func:`second_derivative_analytic` over a stack of directions ``(B, m, k)``."""
    h = np.einsum("ia,bij,jc->bac", P2, draws, Q2, optimize=True)
    if r0 == r:
        return np.einsum("bac,bac->b", h, h)
    return tail_energy(singular_values(h), r - r0)


def second_derivative_numerical(pi_hat: ArrayLike, M: ArrayLike, kappa: float, r: int) -> float:
    """Difference quotient ``[phi_r(pi_hat + kappa M) - phi_r(pi_hat)] / kappa^2``.

    The value is not clamped at zero.
    """
    if not kappa > 0:
        raise InvalidArgument(f"kappa must be positive, got {kappa}")
    a = as_matrix(pi_hat)
    d = np.asarray(M, dtype=np.float64)
    return (phi_r(a + kappa * d, r) - phi_r(a, r)) / kappa**2


def second_derivative_numerical_batch(
    pi_hat: NDArray[np.float64], draws: NDArray[np.float64], kappa: float, r: int
) -> NDArray[np.float64]:
    base = float(tail_energy(singular_values(pi_hat), r))
    return (phi_r_batch(pi_hat + kappa * draws, r) - base) / kappa**2


def threshold_rank(pi_hat: ArrayLike, kappa: float, r: int) -> int:
    """Largest ``j`` in ``1..r`` with ``sigma_j(pi_hat) >= kappa``, else 0."""
    if not kappa > 0:
        raise InvalidArgument(f"kappa must be positive, got {kappa}")
    a = as_matrix(pi_hat)
    _check_r(r, a.shape[1])
    s = singular_values(a)[:r]
    return int(np.count_nonzero(s >= kappa))


@dataclass(frozen=True)
class DerivativeEstimator:
    """Recipe for estimating ``phi''`` from data.

    Build with :meth:`analytic` or :meth:`numerical`. For the analytic kind,
    ``estimated_rank`` is filled in by :meth:`fit`, or supplied directly when
    the rank comes from elsewhere (e.g. a sequential pretest).
    """

    kind: Literal["analytic", "numerical"]
    kappa: float | None
    r: int
    estimated_rank: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("analytic", "numerical"):
            raise InvalidArgument(f"unknown estimator kind {self.kind!r}")
        if self.kappa is not None and not self.kappa > 0:
            raise InvalidArgument(f"kappa must be positive, got {self.kappa}")
        if self.kind == "numerical" and self.kappa is None:
            raise InvalidArgument("the numerical estimator needs a step kappa")
        if self.estimated_rank is not None and not 0 <= self.estimated_rank <= self.r:
            raise InvalidArgument(
                f"estimated_rank must lie in [0, {self.r}], got {self.estimated_rank}"
            )

    @classmethod
    def analytic(cls, kappa: float, r: int) -> DerivativeEstimator:
        return cls("analytic", kappa, r)

    @classmethod
    def numerical(cls, kappa: float, r: int) -> DerivativeEstimator:
        return cls("numerical", kappa, r)

    @classmethod
    def with_rank(cls, r: int, rank: int) -> DerivativeEstimator:
        """Analytic estimator with an externally chosen rank."""
        return cls("analytic", None, r, min(rank, r))

    def fit(self, pi_hat: ArrayLike) -> DerivativeEstimator:
        """Resolve ``estimated_rank`` by thresholding when it is still unknown."""
        if self.kind == "numerical" or self.estimated_rank is not None:
            return self
        if self.kappa is None:
            raise InvalidArgument("analytic estimator needs kappa or an estimated rank")
        return replace(self, estimated_rank=threshold_rank(pi_hat, self.kappa, self.r))

    def evaluate(self, pi_hat: ArrayLike, draws: ArrayLike) -> NDArray[np.float64]:
        """Estimated ``phi''`` at every direction in ``draws`` (shape ``(B, m, k)``)."""
        a = as_matrix(pi_hat)
        d = np.asarray(draws, dtype=np.float64)
        if d.ndim == 2:
            d = d[None]
        if self.kind == "numerical":
            return second_derivative_numerical_batch(a, d, self.kappa, self.r)
        fitted = self.fit(a)
        r0 = fitted.estimated_rank
        _, p2, _, q2 = partition(svd(a), r0)
        return second_derivative_analytic_batch(p2, q2, d, self.r, r0)
