"""Command-line entry point: ``blocksvd {ingest,query,verify,search,bench}``.

Exit codes: 0 success, 1 usage/parse error, 2 data/format error,
3 verification failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from .analysis import reconstruction_error, similar_range_search
from .errors import BlockSvdError, CsvParseError, InvalidParameterError, RangeError
from .io import load_store, raw_nbytes, read_csv_matrix, read_csv_stream, save_store, store_nbytes
from .query import range_query
from .storage import BlockStore

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_VERIFY = 3

DEFAULT_BLOCK_SIZE = 1000
DEFAULT_XI = 0.98
DEFAULT_STRIDE = 500
DEFAULT_TOP = 2
DEFAULT_SEED = 42


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_matrix_csv(path, m: np.ndarray) -> None:
    m = np.atleast_2d(m)
    with open(path, "w") as fh:
        for row in m:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def cmd_ingest(args) -> int:
    store = None
    for row in read_csv_stream(args.input, drop_timestamp=args.drop_timestamp):
        if store is None:
            store = BlockStore(args.block_size, row.size, args.xi)
        store.append_row(row)
    if store is None:
        print(f"error: {args.input} holds no data rows", file=sys.stderr)
        return EXIT_DATA
    save_store(store, args.store)
    sbytes = store_nbytes(store)
    rbytes = raw_nbytes(store)
    print(f"total_rows={store.total_rows}")
    print(f"sealed_blocks={len(store.sealed)}")
    print(f"open_rows={store.open.rows_seen if store.open is not None else 0}")
    print(f"store_bytes={sbytes}")
    print(f"raw_bytes={rbytes}")
    print(f"compression_ratio={rbytes / sbytes:.6g}")
    return EXIT_OK


def _check_range(args) -> None:
    if args.end < args.start:
        raise RangeError(f"end {args.end} precedes start {args.start}")


def cmd_query(args) -> int:
    _check_range(args)
    store = load_store(args.store)
    t0 = time.perf_counter()
    ans = range_query(store, args.start, args.end, args.xi)
    elapsed = time.perf_counter() - t0
    os.makedirs(args.out, exist_ok=True)
    write_matrix_csv(os.path.join(args.out, "U.csv"), ans.u)
    write_matrix_csv(os.path.join(args.out, "sigma.csv"), ans.sigma[:, None])
    write_matrix_csv(os.path.join(args.out, "V.csv"), ans.v)
    print(f"k={ans.k}")
    print(f"elapsed_ms={elapsed * 1e3:.3f}")
    return EXIT_OK


def cmd_verify(args) -> int:
    _check_range(args)
    store = load_store(args.store)
    raw = read_csv_matrix(args.input, drop_timestamp=args.drop_timestamp)
    if raw.shape != (store.total_rows, store.num_columns):
        print(
            f"error: raw data is {raw.shape[0]}x{raw.shape[1]}, store holds "
            f"{store.total_rows}x{store.num_columns}",
            file=sys.stderr,
        )
        return EXIT_DATA
    xi = store.xi if args.xi is None else args.xi
    t0 = time.perf_counter()
    ans = range_query(store, args.start, args.end, xi)
    elapsed = time.perf_counter() - t0
    err = reconstruction_error(raw[args.start : args.end + 1], ans.factors)
    budget = (1.0 - store.xi) + (1.0 - xi) + 1e-6
    ok = err <= budget
    print(f"reconstruction_error={_fmt(err)}")
    print(f"budget={_fmt(budget)}")
    print(f"query_ms={elapsed * 1e3:.3f}")
    print(f"store_bytes={store_nbytes(store)}")
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_search(args) -> int:
    _check_range(args)
    store = load_store(args.store)
    hits = similar_range_search(store, (args.start, args.end), args.stride, args.top, args.xi)
    for h in hits:
        print(f"{h.window_start},{_fmt(h.similarity)}")
    return EXIT_OK


def bench_lengths(store, lengths, reps: int, seed: int = DEFAULT_SEED, xi: float | None = None):
    """Median wall-clock milliseconds of range_query per length at seeded random offsets."""
    if reps < 1:
        raise InvalidParameterError(f"repetitions must be >= 1, got {reps}")
    total = store.total_rows
    for length in lengths:
        if length < 1 or length > total:
            raise InvalidParameterError(f"length {length} not in [1, {total}]")
    rng = np.random.default_rng(seed)
    snap = store.snapshot()
    out = []
    for length in lengths:
        starts = rng.integers(0, total - length + 1, size=reps)
        times = []
        for s in starts:
            t0 = time.perf_counter()
            range_query(snap, int(s), int(s) + length - 1, xi)
            times.append(time.perf_counter() - t0)
        out.append((length, float(np.median(times)) * 1e3))
    return out


def cmd_bench(args) -> int:
    store = load_store(args.store)
    # one untimed query so JIT compilation stays out of the measurements
    range_query(store, 0, min(store.total_rows, 2 * store.block_size) - 1, args.xi)
    print("length,median_ms")
    for length, ms in bench_lengths(store, args.lengths, args.reps, args.seed, args.xi):
        print(f"{length},{ms:.6f}")
    return EXIT_OK


def _lengths(text: str) -> list[int]:
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad lengths list {text!r}") from exc
    if not vals:
        raise argparse.ArgumentTypeError("lengths list is empty")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="blocksvd", description="Block-wise SVD compression and time-range SVD queries.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ing = sub.add_parser("ingest", help="stream a CSV into a compressed store")
    ing.add_argument("--input", required=True)
    ing.add_argument("--store", required=True)
    ing.add_argument("--block-size", type=int, default=DEFAULT_BLOCK_SIZE)
    ing.add_argument("--xi", type=float, default=DEFAULT_XI)
    ing.add_argument("--drop-timestamp", action="store_true")
    ing.set_defaults(func=cmd_ingest)

    q = sub.add_parser("query", help="SVD of a stored time range, written as CSV")
    q.add_argument("--store", required=True)
    q.add_argument("--start", type=int, required=True)
    q.add_argument("--end", type=int, required=True)
    q.add_argument("--xi", type=float, default=None)
    q.add_argument("--out", required=True, help="output directory for U.csv, sigma.csv, V.csv")
    q.set_defaults(func=cmd_query)

    v = sub.add_parser("verify", help="compare a range answer against the raw CSV")
    v.add_argument("--store", required=True)
    v.add_argument("--input", required=True)
    v.add_argument("--start", type=int, required=True)
    v.add_argument("--end", type=int, required=True)
    v.add_argument("--xi", type=float, default=None)
    v.add_argument("--drop-timestamp", action="store_true")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("search", help="find past windows similar to a base range")
    s.add_argument("--store", required=True)
    s.add_argument("--start", type=int, required=True)
    s.add_argument("--end", type=int, required=True)
    s.add_argument("--stride", type=int, default=DEFAULT_STRIDE)
    s.add_argument("--top", type=int, default=DEFAULT_TOP)
    s.add_argument("--xi", type=float, default=None)
    s.set_defaults(func=cmd_search)

    b = sub.add_parser("bench", help="median query time per range length")
    b.add_argument("--store", required=True)
    b.add_argument("--lengths", type=_lengths, required=True)
    b.add_argument("--reps", type=int, default=5)
    b.add_argument("--seed", type=int, default=DEFAULT_SEED)
    b.add_argument("--xi", type=float, default=None)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CsvParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BlockSvdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
