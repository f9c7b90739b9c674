"""Storage phase: fold rows into the open block's SVD, seal full blocks.

Block ``i`` covers rows ``[i*b, (i+1)*b)`` (0-based). Only factors are kept;
raw rows are discarded as soon as they are folded in.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ContractViolation, InvalidInputError, InvalidParameterError
from .linalg import SvdFactors, canonical_sign, orthonormality_defect, thin_svd, truncate_rank

REORTH_EVERY = 64
REORTH_TOL = 1e-10


@dataclass(frozen=True)
class OpenBlock:
    """The most recent, not yet full block. ``capacity`` is the block size b."""

    block_index: int
    capacity: int
    factors: SvdFactors

    @property
    def rows_seen(self) -> int:
        return int(self.factors.u.shape[0])

    @property
    def full(self) -> bool:
        return self.rows_seen >= self.capacity


@dataclass(frozen=True)
class SealedBlock:
    block_index: int
    factors: SvdFactors

    @property
    def k(self) -> int:
        return self.factors.k


def _as_row(row, c: int) -> np.ndarray:
    arr = np.asarray(row, dtype=np.float64).reshape(-1)
    if arr.shape[0] != c:
        raise InvalidInputError(f"row has {arr.shape[0]} entries, store expects {c}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("row contains non-finite entries")
    return arr


def open_block(block_index: int, capacity: int, row: np.ndarray) -> OpenBlock:
    """Start a block from its first row (k = 0 for an all-zero row)."""
    return OpenBlock(block_index, capacity, thin_svd(row.reshape(1, -1)))


def incremental_update(block: OpenBlock, row) -> OpenBlock:
    """Append one row to the block's SVD.

    Decomposes the small stack ``[diag(s) V^T ; row]`` and lifts its left
    factor through ``[[U, 0], [0, 1]]``. Rank is cut only at numerical zero.
    """
    if block.full:
        raise ContractViolation(f"block {block.block_index} already holds {block.capacity} rows")
    f = block.factors
    row = _as_row(row, f.v.shape[0])
    stack = np.vstack([_kernels.weighted_rows(f.sigma, f.v), row[None, :]])
    small = thin_svd(stack)
    u = _kernels.extend_left(f.u, small.u)
    return OpenBlock(block.block_index, block.capacity, SvdFactors(u, small.sigma, small.v))


def reorthonormalize(block: OpenBlock) -> OpenBlock:
    """Restore column orthonormality of U if floating-point drift exceeds 1e-10."""
    f = block.factors
    if f.k == 0 or orthonormality_defect(f.u) <= REORTH_TOL:
        return block
    q, r = np.linalg.qr(f.u)
    inner = thin_svd(r * f.sigma)
    u = q @ inner.u
    v = f.v @ inner.v
    return OpenBlock(block.block_index, block.capacity, SvdFactors(u, inner.sigma, v))


@dataclass(frozen=True)
class StoreSnapshot:
    """Immutable view of a store; safe to query while the writer continues."""

    block_size: int
    num_columns: int
    xi: float
    sealed: tuple[SealedBlock, ...]
    open: OpenBlock | None

    @property
    def total_rows(self) -> int:
        return self.block_size * len(self.sealed) + (self.open.rows_seen if self.open is not None else 0)

    def snapshot(self) -> StoreSnapshot:
        return self


class BlockStore:
    """Sealed per-block factors plus one open tail block.

    Single writer. Readers should work from :meth:`snapshot`.
    """

    def __init__(self, block_size: int, num_columns: int, xi: float = 0.98) -> None:
        if int(block_size) != block_size or block_size < 1:
            raise InvalidParameterError(f"block size must be a positive integer, got {block_size}")
        if int(num_columns) != num_columns or num_columns < 1:
            raise InvalidParameterError(f"column count must be a positive integer, got {num_columns}")
        if not (0.0 < xi <= 1.0):
            raise InvalidParameterError(f"threshold must lie in (0, 1], got {xi}")
        self.block_size = int(block_size)
        self.num_columns = int(num_columns)
        self.xi = float(xi)
        self.sealed: list[SealedBlock] = []
        self.open: OpenBlock | None = None

    def __repr__(self) -> str:
        return (
            f"BlockStore(b={self.block_size}, c={self.num_columns}, xi={self.xi}, "
            f"sealed={len(self.sealed)}, total_rows={self.total_rows})"
        )

    @property
    def total_rows(self) -> int:
        return self.block_size * len(self.sealed) + (self.open.rows_seen if self.open is not None else 0)

    def append_row(self, row) -> None:
        row = _as_row(row, self.num_columns)
        if self.open is None:
            block = open_block(len(self.sealed), self.block_size, row)
        else:
            block = incremental_update(self.open, row)
            if block.rows_seen % REORTH_EVERY == 0:
                block = reorthonormalize(block)
        if block.full:
            sealed = canonical_sign(truncate_rank(block.factors, self.xi))
            self.sealed.append(SealedBlock(block.block_index, sealed))
            self.open = None
        else:
            self.open = block

    def extend(self, rows: Iterable) -> None:
        for row in rows:
            self.append_row(row)

    def snapshot(self) -> StoreSnapshot:
        return StoreSnapshot(self.block_size, self.num_columns, self.xi, tuple(self.sealed), self.open)


def new_store(block_size: int, num_columns: int, xi: float = 0.98) -> BlockStore:
    return BlockStore(block_size, num_columns, xi)


def build_store(data, block_size: int, xi: float = 0.98) -> BlockStore:
    """Stream every row of a 2-D array into a fresh store."""
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise InvalidInputError("data must be 2-D")
    store = BlockStore(block_size, data.shape[1], xi)
    store.extend(data)
    return store
