"""Query phase: trim boundary blocks and stitch block factors for a time range."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InvalidInputError, InvalidParameterError, RangeError
from .linalg import SvdFactors, canonical_sign, thin_svd, truncate_rank
from .storage import BlockStore, StoreSnapshot


@dataclass(frozen=True)
class TimeRange:
    """Closed row interval [t_s, t_e] with its block coordinates for block size b."""

    t_s: int
    t_e: int
    block_size: int

    @property
    def length(self) -> int:
        return self.t_e - self.t_s + 1

    @property
    def start_block(self) -> int:
        return self.t_s // self.block_size

    @property
    def end_block(self) -> int:
        return self.t_e // self.block_size

    @property
    def rows_cut_start(self) -> int:
        return self.t_s - self.start_block * self.block_size

    @property
    def rows_kept_start(self) -> int:
        return self.block_size - self.rows_cut_start

    @property
    def rows_kept_end(self) -> int:
        return self.t_e - self.end_block * self.block_size + 1

    @property
    def rows_cut_end(self) -> int:
        return self.block_size - self.rows_kept_end


@dataclass(frozen=True)
class RangeSvd:
    time_range: TimeRange
    factors: SvdFactors

    @property
    def u(self) -> np.ndarray:
        return self.factors.u

    @property
    def sigma(self) -> np.ndarray:
        return self.factors.sigma

    @property
    def v(self) -> np.ndarray:
        return self.factors.v

    @property
    def k(self) -> int:
        return self.factors.k


def resolve_range(store: BlockStore | StoreSnapshot, t_s: int, t_e: int) -> TimeRange:
    total = store.total_rows
    if total == 0:
        raise RangeError("store is empty")
    if t_s < 0 or t_e < t_s or t_e >= total:
        raise RangeError(f"range [{t_s}, {t_e}] outside stored rows [0, {total - 1}]")
    return TimeRange(int(t_s), int(t_e), store.block_size)


def trim_block(f: SvdFactors, keep_from: int, keep_to: int, xi: float) -> SvdFactors:
    """Re-decompose the rows ``keep_from..keep_to`` (inclusive) of a block's factors.

    The row slice of U stands in for the elimination matrix. The slice times
    diag(sigma) is no longer column-orthonormal, so it gets its own SVD whose
    right factor is folded into V.
    """
    n = f.u.shape[0]
    if keep_from < 0 or keep_to >= n:
        raise InvalidParameterError(f"keep range [{keep_from}, {keep_to}] outside block rows [0, {n - 1}]")
    if keep_to < keep_from:
        raise InvalidParameterError(f"empty keep range [{keep_from}, {keep_to}]")
    rows = keep_to - keep_from + 1
    c = f.v.shape[0]
    if f.k == 0:
        return SvdFactors.empty(rows, c)
    inner = truncate_rank(thin_svd(f.u[keep_from : keep_to + 1] * f.sigma), xi)
    return SvdFactors(inner.u, inner.sigma, f.v @ inner.v)


def stitch(parts: Sequence[SvdFactors], xi: float) -> SvdFactors:
    """Combine vertically consecutive factor sets into one SVD.

    Stacks the ``diag(s_i) V_i^T`` pieces, decomposes the stack, and pushes
    each row band of the stack's left factor through the matching U_i.
    """
    if not parts:
        raise InvalidInputError("stitch needs at least one part")
    c = parts[0].v.shape[0]
    for p in parts:
        if p.v.shape[0] != c:
            raise InvalidInputError(f"parts disagree on column count ({p.v.shape[0]} vs {c})")
    heights = [p.u.shape[0] for p in parts]
    total_rows = int(sum(heights))
    pieces = [_kernels.weighted_rows(p.sigma, p.v) for p in parts if p.k > 0]
    if not pieces:
        return SvdFactors.empty(total_rows, c)
    inner = truncate_rank(thin_svd(np.vstack(pieces)), xi)
    if inner.k == 0:
        return SvdFactors.empty(total_rows, c)
    u = np.empty((total_rows, inner.k))
    row0 = 0
    band0 = 0
    for p, h in zip(parts, heights):
        _kernels.left_product_into(u, row0, p.u, inner.u[band0 : band0 + p.k])
        row0 += h
        band0 += p.k
    return SvdFactors(u, inner.sigma, inner.v)


def _block_factors(snap: StoreSnapshot, i: int) -> SvdFactors:
    if i < len(snap.sealed):
        return snap.sealed[i].factors
    assert snap.open is not None and snap.open.block_index == i
    return snap.open.factors


def _boundary(f: SvdFactors, keep_from: int, keep_to: int, xi: float) -> SvdFactors:
    # whole-block boundaries are used as stored
    if keep_from == 0 and keep_to == f.u.shape[0] - 1:
        return f
    return trim_block(f, keep_from, keep_to, xi)


def range_query(store: BlockStore | StoreSnapshot, t_s: int, t_e: int, xi: float | None = None) -> RangeSvd:
    """SVD of rows ``t_s..t_e`` (inclusive) computed from stored block factors only.

    ``xi`` is the query-side energy threshold; it defaults to the store's.
    """
    snap = store.snapshot()
    tr = resolve_range(snap, t_s, t_e)
    xi = snap.xi if xi is None else float(xi)
    if not (0.0 < xi <= 1.0):
        raise InvalidParameterError(f"threshold must lie in (0, 1], got {xi}")
    s, e = tr.start_block, tr.end_block
    b = snap.block_size
    if s == e:
        f = _block_factors(snap, s)
        out = _boundary(f, tr.rows_cut_start, tr.t_e - s * b, xi)
    else:
        first = _block_factors(snap, s)
        last = _block_factors(snap, e)
        parts = [_boundary(first, tr.rows_cut_start, b - 1, xi)]
        parts.extend(snap.sealed[i].factors for i in range(s + 1, e))
        parts.append(_boundary(last, 0, tr.rows_kept_end - 1, xi))
        out = stitch(parts, xi)
    return RangeSvd(tr, canonical_sign(out))
