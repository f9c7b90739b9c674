"""Hot inner kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports and ``BLOCKSVD_DISABLE_NUMBA`` is
unset (or "0"). Both implementations are always importable under explicit
names (``*_numpy`` / ``*_numba``) so tests and benchmarks can compare them.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("BLOCKSVD_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _DISABLED
BACKEND = "numba" if USE_NUMBA else "numpy"

# Above this many multiply-adds BLAS beats the compiled loops; the numba
# wrappers hand larger products to the numpy path (see benchmarks/).
JIT_MAX_WORK = 4096


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------


def extend_left_numpy(u_prev: np.ndarray, u_small: np.ndarray) -> np.ndarray:
    """Return ``[[u_prev, 0], [0, 1]] @ u_small`` without forming the block matrix.

    ``u_prev`` is n x k, ``u_small`` is (k + 1) x k_new; result is (n + 1) x k_new.
    """
    n, k = u_prev.shape
    out = np.empty((n + 1, u_small.shape[1]))
    np.matmul(u_prev, u_small[:k], out=out[:n])
    out[n] = u_small[k]
    return out


def left_product_into_numpy(out: np.ndarray, row0: int, u_block: np.ndarray, u_slice: np.ndarray) -> None:
    n = u_block.shape[0]
    if u_block.shape[1] == 0:
        out[row0 : row0 + n] = 0.0
    else:
        np.matmul(u_block, u_slice, out=out[row0 : row0 + n])


def weighted_rows_numpy(sigma: np.ndarray, v: np.ndarray) -> np.ndarray:
    """diag(sigma) @ v.T, shape k x c."""
    return sigma[:, None] * v.T


def abs_cosine_numpy(a: np.ndarray, b: np.ndarray) -> float:
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return min(1.0, abs(float(a @ b)) / (na * nb))


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _extend_left_jit(u_prev, u_small):  # pragma: no cover - compiled
        n, k = u_prev.shape
        kn = u_small.shape[1]
        out = np.zeros((n + 1, kn))
        # i-p-j order keeps the inner loop on contiguous rows
        for i in range(n):
            for p in range(k):
                a = u_prev[i, p]
                for j in range(kn):
                    out[i, j] += a * u_small[p, j]
        for j in range(kn):
            out[n, j] = u_small[k, j]
        return out

    @njit(cache=True)
    def _left_product_into_jit(out, row0, u_block, u_slice):  # pragma: no cover - compiled
        n, k = u_block.shape
        m = u_slice.shape[1]
        for i in range(n):
            r = row0 + i
            for j in range(m):
                out[r, j] = 0.0
            for p in range(k):
                a = u_block[i, p]
                for j in range(m):
                    out[r, j] += a * u_slice[p, j]

    @njit(cache=True)
    def _weighted_rows_jit(sigma, v):  # pragma: no cover - compiled
        c, k = v.shape
        out = np.empty((k, c))
        for i in range(k):
            s = sigma[i]
            for j in range(c):
                out[i, j] = s * v[j, i]
        return out

    @njit(cache=True)
    def _abs_cosine_jit(a, b):  # pragma: no cover - compiled
        dot = 0.0
        na = 0.0
        nb = 0.0
        for i in range(a.shape[0]):
            dot += a[i] * b[i]
            na += a[i] * a[i]
            nb += b[i] * b[i]
        if na == 0.0 or nb == 0.0:
            return 0.0
        return min(1.0, abs(dot) / (np.sqrt(na) * np.sqrt(nb)))

    def extend_left_numba(u_prev: np.ndarray, u_small: np.ndarray) -> np.ndarray:
        if u_prev.shape[0] * u_prev.shape[1] * u_small.shape[1] > JIT_MAX_WORK:
            return extend_left_numpy(u_prev, u_small)
        return _extend_left_jit(np.ascontiguousarray(u_prev), np.ascontiguousarray(u_small))

    def left_product_into_numba(out: np.ndarray, row0: int, u_block: np.ndarray, u_slice: np.ndarray) -> None:
        if u_block.shape[0] * u_block.shape[1] * u_slice.shape[1] > JIT_MAX_WORK:
            left_product_into_numpy(out, row0, u_block, u_slice)
            return
        _left_product_into_jit(out, row0, np.ascontiguousarray(u_block), np.ascontiguousarray(u_slice))

    def weighted_rows_numba(sigma: np.ndarray, v: np.ndarray) -> np.ndarray:
        return _weighted_rows_jit(np.ascontiguousarray(sigma), np.ascontiguousarray(v))

    def abs_cosine_numba(a: np.ndarray, b: np.ndarray) -> float:
        return float(_abs_cosine_jit(np.ascontiguousarray(a), np.ascontiguousarray(b)))

else:  # pragma: no cover
    extend_left_numba = extend_left_numpy
    left_product_into_numba = left_product_into_numpy
    weighted_rows_numba = weighted_rows_numpy
    abs_cosine_numba = abs_cosine_numpy


if USE_NUMBA:
    extend_left = extend_left_numba
    left_product_into = left_product_into_numba
    weighted_rows = weighted_rows_numba
    abs_cosine = abs_cosine_numba
else:
    extend_left = extend_left_numpy
    left_product_into = left_product_into_numpy
    weighted_rows = weighted_rows_numpy
    abs_cosine = abs_cosine_numpy
