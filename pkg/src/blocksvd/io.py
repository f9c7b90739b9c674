"""CSV ingestion and the ZSVD binary store format.

Binary layout, all little-endian::

    header   magic "ZSVD" | version u32 | b u32 | c u32 | xi f64
             | sealed_count u64 | total_rows u64 | has_open u8
    sealed   index u64 | k u32 | U (b*k f64, row-major) | sigma (k f64) | V (c*k f64, row-major)
    open     index u64 | rows_seen u64 | k u32 | U (rows_seen*k) | sigma (k) | V (c*k)
"""

from __future__ import annotations

import csv
import os
import struct
from collections.abc import Iterator

import numpy as np

from .errors import CsvParseError, SchemaError, StoreCorruptionError, StoreFormatError
from .linalg import SvdFactors, orthonormality_defect
from .storage import BlockStore, OpenBlock, SealedBlock, StoreSnapshot

MAGIC = b"ZSVD"
VERSION = 1
HEADER = struct.Struct("<4sIIIdQQB")
SEALED_HEAD = struct.Struct("<QI")
OPEN_HEAD = struct.Struct("<QQI")
LOAD_ORTHO_TOL = 1e-8
_F8 = np.dtype("<f8")


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def _try_float(cell: str) -> float | None:
    try:
        return float(cell)
    except ValueError:
        return None


def read_csv_stream(path, expected_cols: int | None = None, drop_timestamp: bool = False) -> Iterator[np.ndarray]:
    """Yield one float64 row per data line of a comma-separated file.

    A first line in which no cell parses as a number is taken as a header and
    skipped. Blank lines are ignored. Line numbers in errors are 1-based file
    lines.
    """
    ncols = expected_cols
    with open(path, newline="") as fh:
        first_data = True
        for lineno, cells in enumerate(csv.reader(fh), start=1):
            cells = [x.strip() for x in cells]
            if not cells or all(x == "" for x in cells):
                continue
            if drop_timestamp:
                cells = cells[1:]
            values = [_try_float(x) for x in cells]
            if first_data:
                first_data = False
                if cells and all(v is None for v in values):
                    continue
            bad = [i for i, v in enumerate(values) if v is None]
            if bad:
                raise CsvParseError(f"non-numeric cell {cells[bad[0]]!r} in column {bad[0] + 1}", lineno)
            row = np.array(values, dtype=np.float64)
            if not np.all(np.isfinite(row)):
                raise CsvParseError("non-finite value", lineno)
            if ncols is None:
                if row.size == 0:
                    raise CsvParseError("row has no data columns", lineno)
                ncols = row.size
            elif row.size != ncols:
                if expected_cols is not None:
                    raise SchemaError(f"line {lineno}: expected {expected_cols} columns, found {row.size}")
                raise CsvParseError(f"ragged row: {row.size} columns, expected {ncols}", lineno)
            yield row


def read_csv_matrix(path, expected_cols: int | None = None, drop_timestamp: bool = False) -> np.ndarray:
    rows = list(read_csv_stream(path, expected_cols, drop_timestamp))
    if not rows:
        return np.zeros((0, expected_cols or 0))
    return np.vstack(rows)


# ---------------------------------------------------------------------------
# binary store
# ---------------------------------------------------------------------------


def _factor_bytes(f: SvdFactors) -> bytes:
    return (
        np.ascontiguousarray(f.u, dtype=_F8).tobytes()
        + np.ascontiguousarray(f.sigma, dtype=_F8).tobytes()
        + np.ascontiguousarray(f.v, dtype=_F8).tobytes()
    )


def serialize_store(store: BlockStore | StoreSnapshot) -> bytes:
    snap = store.snapshot()
    out = [
        HEADER.pack(
            MAGIC,
            VERSION,
            snap.block_size,
            snap.num_columns,
            snap.xi,
            len(snap.sealed),
            snap.total_rows,
            1 if snap.open is not None else 0,
        )
    ]
    for blk in snap.sealed:
        out.append(SEALED_HEAD.pack(blk.block_index, blk.factors.k))
        out.append(_factor_bytes(blk.factors))
    if snap.open is not None:
        ob = snap.open
        out.append(OPEN_HEAD.pack(ob.block_index, ob.rows_seen, ob.factors.k))
        out.append(_factor_bytes(ob.factors))
    return b"".join(out)


def store_nbytes(store: BlockStore | StoreSnapshot) -> int:
    """Exact size of the serialized store, computed without serializing."""
    snap = store.snapshot()
    c = snap.num_columns
    n = HEADER.size
    for blk in snap.sealed:
        n += SEALED_HEAD.size + 8 * blk.factors.k * (snap.block_size + 1 + c)
    if snap.open is not None:
        n += OPEN_HEAD.size + 8 * snap.open.factors.k * (snap.open.rows_seen + 1 + c)
    return n


def raw_nbytes(store: BlockStore | StoreSnapshot) -> int:
    """Size of the uncompressed float64 stream the store represents."""
    return 8 * store.total_rows * store.num_columns


def save_store(store: BlockStore | StoreSnapshot, path) -> None:
    data = serialize_store(store)
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


class _Reader:
    def __init__(self, buf: bytes) -> None:
        self.buf = buf
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.buf):
            raise StoreCorruptionError(f"file truncated while reading {what}")
        chunk = self.buf[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, st: struct.Struct, what: str) -> tuple:
        return st.unpack(self.take(st.size, what))

    def floats(self, count: int, what: str) -> np.ndarray:
        return np.frombuffer(self.take(8 * count, what), dtype=_F8).astype(np.float64)


def _read_factors(rd: _Reader, rows: int, c: int, k: int, what: str) -> SvdFactors:
    if k > min(rows, c):
        raise StoreCorruptionError(f"{what}: rank {k} exceeds min({rows}, {c})")
    u = rd.floats(rows * k, what).reshape(rows, k)
    sigma = rd.floats(k, what)
    v = rd.floats(c * k, what).reshape(c, k)
    f = SvdFactors(u, sigma, v)
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(sigma)) and np.all(np.isfinite(v))):
        raise StoreCorruptionError(f"{what}: non-finite factor data")
    if np.any(sigma < 0) or np.any(np.diff(sigma) > 0):
        raise StoreCorruptionError(f"{what}: singular values not non-negative and non-increasing")
    if orthonormality_defect(u) > LOAD_ORTHO_TOL or orthonormality_defect(v) > LOAD_ORTHO_TOL:
        raise StoreCorruptionError(f"{what}: factors not column-orthonormal")
    return f


def parse_store(buf: bytes) -> BlockStore:
    if len(buf) < 4 or buf[:4] != MAGIC:
        raise StoreFormatError(f"bad magic {buf[:4]!r}, expected {MAGIC!r}")
    rd = _Reader(buf)
    magic, version, b, c, xi, sealed_count, total_rows, has_open = rd.unpack(HEADER, "header")
    if version != VERSION:
        raise StoreFormatError(f"unsupported version {version}")
    if b < 1 or c < 1 or not (0.0 < xi <= 1.0) or has_open not in (0, 1):
        raise StoreCorruptionError("invalid header parameters")
    store = BlockStore(b, c, xi)
    for i in range(sealed_count):
        index, k = rd.unpack(SEALED_HEAD, f"sealed block {i}")
        if index != i:
            raise StoreCorruptionError(f"sealed block {i} carries index {index}")
        store.sealed.append(SealedBlock(i, _read_factors(rd, b, c, k, f"sealed block {i}")))
    if has_open:
        index, rows_seen, k = rd.unpack(OPEN_HEAD, "open block")
        if index != sealed_count or not (1 <= rows_seen < b):
            raise StoreCorruptionError("open block header inconsistent")
        store.open = OpenBlock(index, b, _read_factors(rd, rows_seen, c, k, "open block"))
    if rd.pos != len(buf):
        raise StoreCorruptionError(f"{len(buf) - rd.pos} trailing bytes after last block")
    if store.total_rows != total_rows:
        raise StoreCorruptionError(f"header total_rows {total_rows} disagrees with blocks ({store.total_rows})")
    return store


def load_store(path) -> BlockStore:
    with open(path, "rb") as fh:
        return parse_store(fh.read())
