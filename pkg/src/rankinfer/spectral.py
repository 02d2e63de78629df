"""Singular value decompositions, the tail-energy map and subspace blocks.

``phi_r(A)`` is the sum of the ``k - r`` smallest squared singular values of
an ``m x k`` matrix ``A`` (``m >= k``). It vanishes exactly when
``rank(A) <= r``, which turns a rank hypothesis into a statement about a
real-valued functional.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from rankinfer.errors import DimensionError, InvalidArgument, InvalidInput

RANK_RTOL = 1e-10


def as_matrix(mat: ArrayLike) -> NDArray[np.float64]:
    """Validate ``mat`` as a finite real ``m x k`` array with ``m >= k``."""
    a = np.asarray(mat, dtype=np.float64)
    if a.ndim != 2:
        raise InvalidInput(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInput("matrix has non-finite entries")
    m, k = a.shape
    if m < k:
        raise DimensionError(
            f"matrix is {m}x{k} with fewer rows than columns; pass its transpose "
            "(singular values and rank are transpose-invariant)"
        )
    return a


@dataclass(frozen=True)
class MatrixEstimate:
    """An estimated matrix together with its convergence rate.

    ``rate`` is the factor that makes ``rate * (values - truth)`` converge in
    law; for sample means this is ``sqrt(n)``.
    """

    values: NDArray[np.float64]
    rate: float
    n: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", as_matrix(self.values))
        if not (np.isfinite(self.rate) and self.rate > 0):
            raise InvalidArgument(f"rate must be positive and finite, got {self.rate}")

    @classmethod
    def from_mean(cls, values: ArrayLike, n: int) -> MatrixEstimate:
        return cls(np.asarray(values, dtype=np.float64), float(np.sqrt(n)), int(n))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape  # type: ignore[return-value]


@dataclass(frozen=True)
class SpectralDecomposition:
    """Full SVD ``A = P diag(s) Q^T`` with ``P`` (m x m) and ``Q`` (k x k)."""

    singular_values: NDArray[np.float64]
    left_vectors: NDArray[np.float64]
    right_vectors: NDArray[np.float64]

    @property
    def shape(self) -> tuple[int, int]:
        return self.left_vectors.shape[0], self.right_vectors.shape[0]

    def sigma_matrix(self) -> NDArray[np.float64]:
        m, k = self.shape
        out = np.zeros((m, k))
        out[np.arange(k), np.arange(k)] = self.singular_values
        return out

    def reconstruct(self) -> NDArray[np.float64]:
        return self.left_vectors @ self.sigma_matrix() @ self.right_vectors.T

    def numerical_rank(self, rtol: float = RANK_RTOL) -> int:
        s = self.singular_values
        if s.size == 0 or s[0] == 0.0:
            return 0
        return int(np.count_nonzero(s > rtol * s[0]))


def svd(mat: ArrayLike) -> SpectralDecomposition:
    """Full singular value decomposition with a deterministic sign convention.

    Each left singular vector is flipped so its largest-magnitude entry is
    positive; the paired right vector is flipped with it. The zero matrix
    gets ``P = I_m`` and ``Q = I_k``.

    Raises
    ------
    InvalidInput
        If ``mat`` has non-finite entries.
    DimensionError
        If ``mat`` has fewer rows than columns.
    """
    a = as_matrix(mat)
    m, k = a.shape
    if not np.any(a):
        return SpectralDecomposition(np.zeros(k), np.eye(m), np.eye(k))
    p, s, qt = np.linalg.svd(a, full_matrices=True)
    q = qt.T.copy()
    idx = np.argmax(np.abs(p), axis=0)
    signs = np.sign(p[idx, np.arange(m)])
    signs[signs == 0] = 1.0
    p = p * signs
    q = q * signs[:k]
    return SpectralDecomposition(s, p, q)


def singular_values(mats: ArrayLike) -> NDArray[np.float64]:
    """Singular values (descending) of a matrix or a stack of matrices."""
    a = np.asarray(mats, dtype=np.float64)
    if a.shape[-1] == 0 or a.shape[-2] == 0:
        return np.zeros(a.shape[:-2] + (0,))
    return np.linalg.svd(a, compute_uv=False)


def tail_energy(sv: NDArray[np.float64], start: int, stop: int | None = None) -> NDArray[np.float64]:
    """Sum of squared singular values ``sv[..., start:stop]`` (0-based, descending)."""
    return np.sum(np.square(sv[..., start:stop]), axis=-1)


def phi_r(mat: ArrayLike, r: int) -> float:
    """Sum of the ``k - r`` smallest squared singular values of ``mat``.

    Parameters
    ----------
    mat : array_like, shape (m, k)
        Real matrix with ``m >= k``.
    r : int
        Hypothesized rank, ``0 <= r <= k - 1``.
    """
    a = as_matrix(mat)
    k = a.shape[1]
    if not 0 <= r <= k - 1:
        raise InvalidArgument(f"r must lie in [0, {k - 1}], got {r}")
    return float(tail_energy(singular_values(a), r))


def phi_r_batch(mats: NDArray[np.float64], r: int) -> NDArray[np.float64]:
    """Vectorized :func:`phi_r` over a stack ``(B, m, k)``; no validation."""
    return tail_energy(singular_values(mats), r)


def partition(dec: SpectralDecomposition, r0: int):
    """Split the singular vectors at ``r0``.

    Returns ``(P1, P2, Q1, Q2)`` where ``P2`` holds the last ``m - r0`` left
    vectors and ``Q2`` the last ``k - r0`` right vectors. ``r0 = k`` yields an
    empty ``Q2``.
    """
    m, k = dec.shape
    if not 0 <= r0 <= k:
        raise InvalidArgument(f"r0 must lie in [0, {k}], got {r0}")
    p, q = dec.left_vectors, dec.right_vectors
    return p[:, :r0], p[:, r0:], q[:, :r0], q[:, r0:]
