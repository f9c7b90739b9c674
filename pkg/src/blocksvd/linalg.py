"""Dense SVD primitives: thin SVD, energy-threshold truncation, reconstruction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidInputError, InvalidParameterError

# singular values below this fraction of the largest are treated as zero
RANK_CUTOFF = 1e-12


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D float64 array and reject NaN/Inf."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class SvdFactors:
    """Thin SVD ``u @ diag(sigma) @ v.T`` with u: m x k, sigma: (k,), v: n x k."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    @property
    def k(self) -> int:
        return int(self.sigma.shape[0])

    @property
    def shape(self) -> tuple[int, int]:
        return int(self.u.shape[0]), int(self.v.shape[0])

    @classmethod
    def empty(cls, m: int, n: int) -> SvdFactors:
        return cls(np.zeros((m, 0)), np.zeros(0), np.zeros((n, 0)))

    def head(self, k: int) -> SvdFactors:
        return SvdFactors(self.u[:, :k], self.sigma[:k], self.v[:, :k])

    def check(self, tol: float = 1e-10) -> None:
        """Raise InvalidInputError if any factor invariant is violated."""
        k = self.k
        if self.u.ndim != 2 or self.v.ndim != 2 or self.u.shape[1] != k or self.v.shape[1] != k:
            raise InvalidInputError("factor shapes disagree on rank")
        if k > min(self.shape):
            raise InvalidInputError("rank exceeds min(m, n)")
        if np.any(self.sigma < 0) or np.any(np.diff(self.sigma) > 0):
            raise InvalidInputError("singular values must be non-negative and non-increasing")
        if orthonormality_defect(self.u) > tol or orthonormality_defect(self.v) > tol:
            raise InvalidInputError("factor columns are not orthonormal")


def _lapack_svd(a: np.ndarray):
    try:
        return scipy.linalg.svd(a, full_matrices=False, check_finite=False, lapack_driver="gesdd")
    except np.linalg.LinAlgError:
        # gesdd occasionally fails to converge on nearly-degenerate input
        return scipy.linalg.svd(a, full_matrices=False, check_finite=False, lapack_driver="gesvd")


def thin_svd(a) -> SvdFactors:
    """Thin SVD truncated to numerical rank (sigma < 1e-12 * sigma_max dropped)."""
    a = as_matrix(a)
    m, n = a.shape
    if m < 1 or n < 1:
        raise InvalidInputError(f"matrix must be non-empty, got shape {a.shape}")
    u, s, vt = _lapack_svd(a)
    if s.size == 0 or s[0] == 0.0:
        return SvdFactors.empty(m, n)
    r = int(np.count_nonzero(s >= RANK_CUTOFF * s[0]))
    return SvdFactors(np.ascontiguousarray(u[:, :r]), s[:r].copy(), np.ascontiguousarray(vt[:r].T))


def energy_rank(sigma: np.ndarray, xi: float) -> int:
    """Smallest k whose cumulative squared-singular-value share reaches ``xi``."""
    if not (0.0 < xi <= 1.0):
        raise InvalidParameterError(f"threshold must lie in (0, 1], got {xi}")
    if sigma.size == 0 or sigma[0] == 0.0:
        return 0
    # power-of-two rescale is exact and keeps squares clear of under/overflow
    scaled = np.ldexp(sigma, -int(np.frexp(sigma[0])[1]))
    cum = np.cumsum(scaled * scaled)
    total = cum[-1]
    if total == 0.0:
        return 0
    if xi == 1.0:
        # tail energies under float resolution would otherwise be dropped
        return int(np.count_nonzero(sigma > 0.0))
    ratios = cum / total
    return int(np.argmax(ratios >= xi)) + 1


def truncate_rank(f: SvdFactors, xi: float) -> SvdFactors:
    return f.head(energy_rank(f.sigma, xi))


def reconstruct(f: SvdFactors) -> np.ndarray:
    if f.k == 0:
        return np.zeros(f.shape)
    return (f.u * f.sigma) @ f.v.T


def orthonormality_defect(m) -> float:
    """max |M^T M - I|."""
    m = np.asarray(m, dtype=np.float64)
    if m.shape[1] == 0:
        return 0.0
    g = m.T @ m
    g[np.diag_indices_from(g)] -= 1.0
    return float(np.max(np.abs(g)))


def canonical_sign(f: SvdFactors) -> SvdFactors:
    """Flip column pairs so each V column's largest-magnitude entry is positive."""
    if f.k == 0:
        return f
    idx = np.argmax(np.abs(f.v), axis=0)
    signs = np.where(f.v[idx, np.arange(f.k)] < 0, -1.0, 1.0)
    if np.all(signs > 0):
        return f
    return SvdFactors(f.u * signs, f.sigma, f.v * signs)
