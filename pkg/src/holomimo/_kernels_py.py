"""Pure numpy implementations of the hot kernels.

Used when the compiled extension is unavailable or when
``HOLOMIMO_PURE_PYTHON`` is set.  Must stay bit-compatible with
``_kernels.pyx`` for the integer RNG path.
"""
import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


def splitmix_uniforms(key, counters):
    """Uniform variates in [0, 1) from the SplitMix64 output at ``counters``.

    Value ``i`` equals the ``counters[i] + 1``-th output of a SplitMix64
    stream whose state starts at ``key``.
    """
    c = np.ascontiguousarray(counters, dtype=np.uint64)
    z = (c + np.uint64(1)) * GOLDEN + np.uint64(key)
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    z = z ^ (z >> _S31)
    return (z >> _S11).astype(np.float64) * _INV53


def vmf_mixture(dirs, means, kappas, coefs):
    """Evaluate ``sum_m coefs[m] * exp(kappas[m] * (dirs @ means[m] - 1))``."""
    dirs = np.asarray(dirs, dtype=np.float64)
    cosang = dirs @ np.asarray(means, dtype=np.float64).T
    return np.exp(np.asarray(kappas)[None, :] * (cosang - 1.0)) @ np.asarray(coefs)
