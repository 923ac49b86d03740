"""Counter-based random numbers for reproducible particle simulations.

Each uniform variate is a pure function of ``(master seed, step index,
particle index)``: the three integers are mixed through two rounds of the
SplitMix64 finalizer and the top 53 bits map to a double in [0, 1).  Stateless
draws make the engine's output independent of evaluation order, so the same
seed gives bit-identical results no matter how the particle loop is scheduled,
and a run can be reproduced from its manifest alone.

The same construction is exposed twice: :func:`uniform_stream` for vectorized
numpy use (initialization, tests) and ``u01`` as a numba-jitted scalar for the
stepping kernels.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = ["uniform_stream", "u01", "mix64"]

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_STEP_SALT = np.uint64(0xD1B54A32D192ED03)
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


@njit(cache=True, inline="always")
def mix64(z):
    """SplitMix64 finalizer: a 64-bit bijective avalanche mix."""
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def u01(seed, step, particle):
    """Uniform double in [0, 1) keyed by (seed, step, particle).

    Two dependent mix rounds decorrelate the step and particle counters; the
    low 11 bits are discarded so the result is an exact multiple of 2**-53.
    """
    z = mix64(seed + _GAMMA * np.uint64(step) + _STEP_SALT)
    z = mix64(z + _GAMMA * np.uint64(particle))
    return float(z >> np.uint64(11)) * _INV_2_53


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = z.copy()
    z ^= z >> np.uint64(30)
    z *= _MIX1
    z ^= z >> np.uint64(27)
    z *= _MIX2
    z ^= z >> np.uint64(31)
    return z


def uniform_stream(seed: int, step: int, n: int, offset: int = 0) -> np.ndarray:
    """Vectorized draw: uniforms for particles ``offset .. offset+n-1`` at one step."""
    base = np.empty(1, dtype=np.uint64)
    base[0] = np.uint64(step & 0xFFFFFFFFFFFFFFFF)
    base *= _GAMMA
    base += np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    base += _STEP_SALT
    z = _mix64_array(base)[0]
    idx = np.arange(offset, offset + n, dtype=np.uint64) * _GAMMA
    idx += z
    out = _mix64_array(idx)
    return (out >> np.uint64(11)).astype(np.float64) * _INV_2_53
