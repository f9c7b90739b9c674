"""Streaming block-wise SVD compression with arbitrary time-range SVD queries."""

from ._kernels import BACKEND
from .analysis import (
    SearchHit,
    brute_force_search,
    naive_range_svd,
    oracle_range_svd,
    reconstruction_error,
    similar_range_search,
)
from .errors import (
    BlockSvdError,
    ContractViolation,
    CsvParseError,
    InvalidInputError,
    InvalidParameterError,
    RangeError,
    SchemaError,
    StoreCorruptionError,
    StoreFormatError,
)
from .io import load_store, read_csv_stream, save_store, store_nbytes
from .linalg import (
    SvdFactors,
    canonical_sign,
    orthonormality_defect,
    reconstruct,
    thin_svd,
    truncate_rank,
)
from .query import RangeSvd, TimeRange, range_query, stitch, trim_block
from .storage import (
    BlockStore,
    OpenBlock,
    SealedBlock,
    StoreSnapshot,
    build_store,
    incremental_update,
    new_store,
    reorthonormalize,
)

__version__ = "0.1.0"
