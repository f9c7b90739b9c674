"""Synthetic multivariate streams for tests, benchmarks, and demos."""

from __future__ import annotations

import numpy as np
from scipy.signal import lfilter


def low_rank_stream(rows: int, cols: int, rank: int, seed: int = 0, noise: float = 0.0) -> np.ndarray:
    """Exactly rank-``rank`` data (plus optional i.i.d. Gaussian noise)."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((rows, rank)) @ rng.standard_normal((rank, cols))
    if noise:
        x += noise * rng.standard_normal((rows, cols))
    return x


def colored_noise_stream(rows: int, cols: int, seed: int = 0, phi: float = 0.95, decay: float = 1.5) -> np.ndarray:
    """AR(1) latent channels with power-law scales, mixed by a random rotation."""
    rng = np.random.default_rng(seed)
    z = lfilter([1.0], [1.0, -phi], rng.standard_normal((rows, cols)), axis=0)
    z *= 1.0 / (np.arange(cols) + 1.0) ** decay
    q, _ = np.linalg.qr(rng.standard_normal((cols, cols)))
    return z @ q


def planted_pattern_stream(
    rows: int,
    cols: int,
    length: int,
    offsets,
    seed: int = 0,
    noise: float = 0.05,
) -> tuple[np.ndarray, np.ndarray]:
    """Background noise with one random ``length x cols`` pattern copied to each offset.

    Returns ``(stream, pattern)``.
    """
    rng = np.random.default_rng(seed)
    pattern = rng.standard_normal((length, 1)) @ rng.standard_normal((1, cols))
    pattern += 0.1 * rng.standard_normal((length, cols))
    x = noise * rng.standard_normal((rows, cols))
    for off in offsets:
        x[off : off + length] += pattern
    return x, pattern
