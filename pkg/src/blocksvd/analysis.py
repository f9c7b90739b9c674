"""Error metrics, exact-SVD oracle, and sliding-window pattern search."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InvalidInputError, InvalidParameterError, RangeError
from .linalg import SvdFactors, as_matrix, reconstruct, thin_svd
from .query import TimeRange, range_query, resolve_range
from .storage import BlockStore, StoreSnapshot


def reconstruction_error(raw, f: SvdFactors) -> float:
    """Relative squared Frobenius error ||X - U S V^T||^2 / ||X||^2.

    An all-zero ``raw`` gives 0.0 when the factors also reconstruct to zero and
    ``inf`` otherwise (the ratio is undefined).
    """
    raw = as_matrix(raw, "raw")
    if raw.shape != f.shape:
        raise InvalidInputError(f"raw shape {raw.shape} does not match factors {f.shape}")
    diff = float(np.sum((raw - reconstruct(f)) ** 2))
    denom = float(np.sum(raw * raw))
    if denom == 0.0:
        return 0.0 if diff == 0.0 else math.inf
    return diff / denom


def oracle_range_svd(raw, t_s: int, t_e: int) -> SvdFactors:
    """Direct thin SVD of the raw rows t_s..t_e; the ground truth for query tests."""
    raw = as_matrix(raw, "raw")
    if t_s < 0 or t_e < t_s or t_e >= raw.shape[0]:
        raise RangeError(f"range [{t_s}, {t_e}] outside raw rows [0, {raw.shape[0] - 1}]")
    return thin_svd(raw[t_s : t_e + 1])


def naive_range_svd(store: BlockStore | StoreSnapshot, t_s: int, t_e: int) -> SvdFactors:
    """Reconstruct the covered blocks densely and decompose the slice (baseline)."""
    snap = store.snapshot()
    tr = resolve_range(snap, t_s, t_e)
    blocks = []
    for i in range(tr.start_block, tr.end_block + 1):
        f = snap.sealed[i].factors if i < len(snap.sealed) else snap.open.factors
        blocks.append(reconstruct(f))
    dense = np.vstack(blocks)
    off = tr.start_block * snap.block_size
    return thin_svd(dense[t_s - off : t_e - off + 1])


@dataclass(frozen=True)
class SearchHit:
    """A past window and the |cosine| between its first left singular vector and the base's."""

    window_start: int
    similarity: float


def _first_left_vector(f: SvdFactors, length: int) -> np.ndarray:
    if f.k == 0:
        return np.zeros(length)
    return f.u[:, 0]


def similar_range_search(
    store: BlockStore | StoreSnapshot,
    base: TimeRange | tuple[int, int],
    stride: int,
    top_n: int,
    xi: float | None = None,
) -> list[SearchHit]:
    """Rank past windows of the base's length by similarity of their leading patterns.

    Windows start at 0, stride, 2*stride, ... and must end before the base
    starts. Ties go to the earlier window.
    """
    snap = store.snapshot()
    t_s, t_e = (base.t_s, base.t_e) if isinstance(base, TimeRange) else base
    tr = resolve_range(snap, t_s, t_e)
    if tr.length < 2:
        raise InvalidParameterError("base range must span at least 2 rows")
    if stride < 1:
        raise InvalidParameterError(f"stride must be >= 1, got {stride}")
    if top_n < 0:
        raise InvalidParameterError(f"top_n must be >= 0, got {top_n}")
    length = tr.length
    u1 = _first_left_vector(range_query(snap, tr.t_s, tr.t_e, xi).factors, length)
    hits = []
    for w in range(0, tr.t_s - length + 1, stride):
        ub = _first_left_vector(range_query(snap, w, w + length - 1, xi).factors, length)
        hits.append(SearchHit(w, _kernels.abs_cosine(u1, ub)))
    hits.sort(key=lambda h: (-h.similarity, h.window_start))
    return hits[:top_n]


def brute_force_search(raw, base: tuple[int, int], stride: int, top_n: int) -> list[SearchHit]:
    """Same scoring as :func:`similar_range_search` but from exact SVDs of raw windows."""
    raw = as_matrix(raw, "raw")
    t_s, t_e = base
    length = t_e - t_s + 1
    u1 = _first_left_vector(oracle_range_svd(raw, t_s, t_e), length)
    hits = []
    for w in range(0, t_s - length + 1, stride):
        ub = _first_left_vector(oracle_range_svd(raw, w, w + length - 1), length)
        na, nb = np.linalg.norm(u1), np.linalg.norm(ub)
        score = 0.0 if na == 0 or nb == 0 else min(1.0, abs(float(u1 @ ub)) / (na * nb))
        hits.append(SearchHit(w, score))
    hits.sort(key=lambda h: (-h.similarity, h.window_start))
    return hits[:top_n]
