"""Numerical substrate: complex Gaussian sampling, SVD-based factorizations
and the principal branch of the Lambert W function.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import ConvergenceFailure, DomainError, InsufficientNullity, RankDeficient

#: Relative singular-value threshold below which a matrix is treated as rank deficient.
RANK_TOL = 1e-12

_INV_E = math.exp(-1.0)


class SvdFactors(NamedTuple):
    """Full SVD ``a = left_vectors @ diag(singular_values) @ right_vectors^H``.

    ``singular_values`` has ``min(rows, cols)`` entries sorted descending; the
    unitary factors are square (``full_matrices=True``).
    """

    left_vectors: np.ndarray
    singular_values: np.ndarray
    right_vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        k = self.singular_values.size
        return (self.left_vectors[:, :k] * self.singular_values) @ self.right_vectors[:, :k].conj().T


def sample_complex_gaussian(rows: int, cols: int, variance: float,
                            stream: np.random.Generator) -> np.ndarray:
    """Draw a ``rows x cols`` matrix with i.i.d. CN(0, variance) entries.

    Real and imaginary parts are independent with variance ``variance / 2``
    each, so ``E|h|^2 = variance``.
    """
    if rows < 1 or cols < 1:
        raise ValueError(f"shape must be positive, got ({rows}, {cols})")
    if not variance > 0:
        raise ValueError(f"variance must be positive, got {variance}")
    scale = math.sqrt(variance / 2.0)
    re = stream.standard_normal((rows, cols))
    im = stream.standard_normal((rows, cols))
    return scale * (re + 1j * im)


def svd(a: np.ndarray) -> SvdFactors:
    a = np.asarray(a)
    if a.ndim != 2 or a.size == 0:
        raise ValueError(f"svd needs a non-empty 2-D matrix, got shape {a.shape}")
    try:
        u, s, vh = np.linalg.svd(a, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return SvdFactors(u, s, vh.conj().T)


def _check_rank(s: np.ndarray) -> None:
    if s.size == 0 or s[0] == 0.0 or s[-1] < RANK_TOL * s[0]:
        smin = s[-1] if s.size else 0.0
        smax = s[0] if s.size else 0.0
        raise RankDeficient(f"smallest singular value {smin:.3e} below {RANK_TOL:g} x {smax:.3e}")


def pseudo_inverse(a: np.ndarray) -> np.ndarray:
    """Moore-Penrose inverse of a full-rank matrix.

    For a wide matrix with full row rank this equals ``a^H (a a^H)^{-1}``.
    Raises :class:`RankDeficient` when the condition number exceeds ``1 / RANK_TOL``.
    """
    f = svd(a)
    s = f.singular_values
    _check_rank(s)
    k = s.size
    return (f.right_vectors[:, :k] / s) @ f.left_vectors[:, :k].conj().T


def null_space_basis(a: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormal ``M x dim`` basis of vectors annihilated by ``a``.

    Columns are right singular vectors of ``a`` ordered by ascending singular
    value, so the exactly-zero directions come first. A ``0 x M`` input has
    no constraints and yields the leading columns of the identity.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    m = a.shape[1]
    if dim < 1:
        raise ValueError(f"dim must be positive, got {dim}")
    if a.shape[0] == 0:
        if dim > m:
            raise InsufficientNullity(f"requested {dim} null directions in a {m}-dim space")
        return np.eye(m, dim, dtype=complex)
    f = svd(a)
    s = f.singular_values
    rank = int(np.count_nonzero(s > RANK_TOL * s[0])) if s[0] > 0 else 0
    nullity = m - rank
    if dim > nullity:
        raise InsufficientNullity(f"requested {dim} null directions but nullity is {nullity}")
    zero_space = f.right_vectors[:, rank:][:, ::-1]
    return np.ascontiguousarray(zero_space[:, :dim])


def trace_inverse_gram(h: np.ndarray) -> float:
    """``tr((h h^H)^{-1})`` computed as the sum of inverse squared singular values."""
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] > h.shape[1]:
        raise ValueError(f"expected a wide or square matrix, got shape {h.shape}")
    s = np.linalg.svd(h, compute_uv=False)
    _check_rank(s)
    return float(np.sum(1.0 / s**2))


def lambert_w0(x: float, max_iter: int = 50, tol: float = 1e-14) -> float:
    """Principal branch ``W0(x)`` of the Lambert W function, for ``x >= -1/e``.

    Halley iteration on ``w e^w - x`` started from a branch-point series,
    ``log1p`` or the asymptotic ``log x - log log x`` depending on the region.
    """
    x = float(x)
    if math.isnan(x):
        raise DomainError("lambert_w0 of NaN")
    if math.isinf(x):
        if x > 0:
            return math.inf
        raise DomainError("lambert_w0 undefined for -inf")
    # distance from the branch point, in units where the branch sits at 0
    q = 2.0 * (math.e * x + 1.0)
    if q < 0.0:
        if q > -1e-12:
            q = 0.0
        else:
            raise DomainError(f"lambert_w0 undefined below -1/e, got {x!r}")
    if x == 0.0:
        return 0.0
    if q < 1e-30:
        return -1.0

    if q < 0.5:
        p = math.sqrt(q)
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    elif x < 3.0:
        w = math.log1p(x) * (1.0 - math.log1p(math.log1p(x)) / (2.0 + math.log1p(x)))
    else:
        l1 = math.log(x)
        l2 = math.log(l1)
        w = l1 - l2 + l2 / l1

    scale = max(1.0, abs(x))
    for _ in range(max_iter):
        ew = math.exp(w)
        f = w * ew - x
        if abs(f) <= tol * scale:
            return w
        wp1 = w + 1.0
        if wp1 == 0.0:
            return w
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w_next = w - step
        if abs(w_next - w) <= 4.0 * np.finfo(float).eps * max(1.0, abs(w_next)):
            return w_next
        w = w_next
    if abs(w * math.exp(w) - x) <= 1e-12 * scale:
        return w
    raise ConvergenceFailure(f"lambert_w0 did not converge for x={x!r}")
