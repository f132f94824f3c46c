"""Deterministic counter-based random streams.

Every random quantity in this package is drawn from a SplitMix64 counter
sequence (Steele, Lea & Flood 2014): draw ``i`` of a substream with 64-bit
key ``k`` is ``mix64(k + i * GOLDEN)``, where ``mix64`` is the SplitMix64
finalizer.  Substream keys are derived by folding integer labels
(seed, stream kind, entity index) through the same mixer, so per-edge and
per-site Poisson processes are independent and reproducible regardless of
the order in which they are generated.  All arithmetic is uint64 modulo
2**64; the streams are bit-identical across platforms and the numba kernels
reproduce the numpy-vectorized values exactly.

Uniform doubles take the top 53 bits of the mixed word, giving values in
[0, 1).
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN_INT = 0x9E3779B97F4A7C15
_FOLD_INT = 0xD6E8FEB86659FD93
_INIT_INT = 0x8C0D8A3C6F1B2E4D
GOLDEN = np.uint64(_GOLDEN_INT)
_MIX_A = np.uint64(0xBF58476D1CE4E5B9)
_MIX_B = np.uint64(0x94D049BB133111EB)
_FOLD = np.uint64(_FOLD_INT)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53

# Stream kinds.  Appending new kinds is fine; renumbering breaks replay.
KIND_LAMBDA = 0
KIND_ALPHA = 1
KIND_DEATH = 2
KIND_GAMMA = 3
KIND_THIN = 4
KIND_GILLESPIE = 5
KIND_REPLICATE = 6
KIND_INIT = 7
KIND_SWEEP = 8
KIND_CRITICAL = 9
KIND_BLOCK = 10


def mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer, vectorized over uint64 arrays."""
    z = (z ^ (z >> np.uint64(30))) * _MIX_A
    z = (z ^ (z >> np.uint64(27))) * _MIX_B
    return z ^ (z >> np.uint64(31))


def _mix64_int(z: int) -> int:
    # scalar twin of mix64, in Python ints (numpy warns on scalar overflow)
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_key(*labels) -> np.uint64:
    """Fold integer labels into a 64-bit substream key.

    The chain is h := mix64((h + GOLDEN) ^ (label * FOLD)) starting from a
    fixed constant, everything modulo 2**64; negative labels wrap.
    """
    h = _INIT_INT
    for lab in labels:
        h = _mix64_int(((h + _GOLDEN_INT) & _MASK)
                       ^ (((int(lab) & _MASK) * _FOLD_INT) & _MASK))
    return np.uint64(h)


def uniforms(key: np.uint64, count: int, start: int = 0) -> np.ndarray:
    """Return draws ``start .. start+count-1`` of the substream as float64 in [0,1)."""
    idx = np.arange(start, start + count, dtype=np.uint64)
    return (mix64(np.uint64(key) + idx * GOLDEN) >> np.uint64(11)) * _INV53


def uniforms_2d(keys: np.ndarray, count: int) -> np.ndarray:
    """Draws 0..count-1 for several substreams at once; shape (len(keys), count)."""
    idx = np.arange(count, dtype=np.uint64)
    return (mix64(keys[:, None] + idx[None, :] * GOLDEN) >> np.uint64(11)) * _INV53


def child_keys(base_key, entities: np.ndarray) -> np.ndarray:
    """Vectorized last fold step of derive_key.

    ``child_keys(derive_key(a, b), es)[i]`` equals ``derive_key(a, b, es[i])``.
    """
    shifted = np.uint64((int(base_key) + _GOLDEN_INT) & _MASK)
    return mix64(shifted ^ (entities.astype(np.uint64) * _FOLD))


def derive_seed(seed: int, kind: int, index: int) -> int:
    """64-bit child seed for replicate/grid-point derivation."""
    return int(derive_key(seed, kind, index))


def poisson_arrivals(key: np.uint64, rate: float, horizon: float) -> np.ndarray:
    """Arrival times of a Poisson process of the given rate on (0, horizon].

    Exponential inter-arrival times by inverse CDF, accumulated until the
    horizon is passed.  Fully determined by the substream key.
    """
    if rate <= 0.0 or horizon <= 0.0:
        return np.empty(0, dtype=np.float64)
    out_blocks = []
    t_base = 0.0
    start = 0
    # Enough draws to overshoot the horizon w.h.p.; extends if unlucky.
    block = max(8, int(rate * horizon + 6.0 * np.sqrt(rate * horizon) + 8))
    while True:
        u = uniforms(key, block, start)
        gaps = -np.log1p(-u) / rate
        times = t_base + np.cumsum(gaps)
        over = np.searchsorted(times, horizon, side="right")
        out_blocks.append(times[:over])
        if over < len(times):
            return np.concatenate(out_blocks) if len(out_blocks) > 1 else out_blocks[0]
        start += block
        t_base = times[-1]


def arrival_counts_matrix(keys: np.ndarray, rate: float, horizon: float):
    """Vectorized arrivals for many substreams sharing one rate.

    Returns (times, owner) where ``times`` concatenates the arrival times of
    every substream and ``owner[i]`` is the row in ``keys`` that produced
    ``times[i]``.  Each row reproduces ``poisson_arrivals`` exactly.
    """
    n = len(keys)
    if n == 0 or rate <= 0.0 or horizon <= 0.0:
        return np.empty(0, dtype=np.float64), np.empty(0, dtype=np.int64)
    block = max(8, int(rate * horizon + 6.0 * np.sqrt(rate * horizon) + 8))
    u = uniforms_2d(keys, block)
    times = np.cumsum(-np.log1p(-u) / rate, axis=1)
    counts = (times <= horizon).sum(axis=1)
    # Rows whose whole block landed inside the horizon need the slow path.
    short = np.nonzero(counts == block)[0]
    rows = [times[i, : counts[i]] for i in range(n)]
    for i in short:
        rows[i] = poisson_arrivals(keys[i], rate, horizon)
        counts[i] = len(rows[i])
    owner = np.repeat(np.arange(n, dtype=np.int64), counts)
    flat = np.concatenate(rows) if rows else np.empty(0, dtype=np.float64)
    return flat, owner
