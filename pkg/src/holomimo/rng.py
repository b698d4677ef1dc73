"""Counter-based random draws.

Every variate is a pure function of ``(seed, stream, counter)``: the
SplitMix64 output at position ``counter`` of a stream whose initial state
is derived from the seed and a stream label.  No generator state is
carried between calls, so entries can be produced in any order, on any
worker, and still match bit for bit.
"""
import hashlib

import numpy as np

from ._backend import kernels

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z):
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _label(stream):
    return int.from_bytes(hashlib.blake2b(stream.encode(), digest_size=8).digest(), "little")


def stream_key(seed, stream):
    """Initial SplitMix64 state for ``stream`` under ``seed``."""
    k = mix64(int(seed) + GOLDEN)
    return mix64(((k ^ _label(stream)) + GOLDEN) & MASK64)


def derive_seed(master_seed, index):
    """64-bit seed of realization ``index`` under ``master_seed``."""
    key = stream_key(master_seed, "realization")
    return mix64((key + (int(index) + 1) * GOLDEN) & MASK64)


def entry_counters(n_rows, n_cols):
    """Counters keyed by matrix position: ``(row << 32) | col``.

    Independent of the matrix shape, so entry ``(b, a)`` always reads the
    same variate whatever the other dimensions are.
    """
    rows = np.arange(n_rows, dtype=np.uint64)[:, None] << np.uint64(32)
    return rows | np.arange(n_cols, dtype=np.uint64)[None, :]


def uniforms(seed, stream, counters):
    counters = np.asarray(counters, dtype=np.uint64)
    out = kernels.splitmix_uniforms(stream_key(seed, stream), counters.ravel())
    return np.asarray(out).reshape(counters.shape)


def standard_normal(seed, stream, counters):
    """N(0, 1) variates by Box-Muller (cosine branch)."""
    u1 = uniforms(seed, stream + "/radius", counters)
    u2 = uniforms(seed, stream + "/angle", counters)
    return np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)


def complex_normal(seed, stream, counters):
    """Circularly-symmetric CN(0, 1) variates, one Box-Muller pair each."""
    u1 = uniforms(seed, stream + "/radius", counters)
    u2 = uniforms(seed, stream + "/angle", counters)
    r = np.sqrt(-np.log1p(-u1))
    return r * np.exp(2j * np.pi * u2)


def uniform_phase(seed, stream, counters):
    """Phases uniform on [-pi, pi)."""
    return 2.0 * np.pi * uniforms(seed, stream, counters) - np.pi
