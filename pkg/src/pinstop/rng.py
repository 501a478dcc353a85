"""Counter-based random streams: Philox4x64-10 keyed by (seed, stream id).

Every draw is a pure function of (seed, stream, tag, block), so results do
not depend on how paths are split into batches or threads. The block
function is bit-compatible with ``numpy.random.Philox``.
"""
from __future__ import annotations

import numpy as np
from numba import njit, uint64

_M0 = uint64(0xD2E7470EE14C6C93)
_M1 = uint64(0xCA5A826395121157)
_W0 = uint64(0x9E3779B97F4A7C15)
_W1 = uint64(0xBB67AE8584CAA73B)
_MASK32 = uint64(0xFFFFFFFF)
_S32 = uint64(32)
_S11 = uint64(11)
_TWO_M53 = 2.0 ** -53
_TWO_PI = 2.0 * np.pi


@njit(cache=True, inline="always")
def _mulhilo(a, b):
    a_lo = a & _MASK32
    a_hi = a >> _S32
    b_lo = b & _MASK32
    b_hi = b >> _S32
    p0 = a_lo * b_lo
    p1 = a_lo * b_hi
    p2 = a_hi * b_lo
    p3 = a_hi * b_hi
    mid = (p0 >> _S32) + (p1 & _MASK32) + (p2 & _MASK32)
    hi = p3 + (p1 >> _S32) + (p2 >> _S32) + (mid >> _S32)
    return hi, a * b


@njit(cache=True)
def philox_block(k0, k1, c0, c1, c2, c3):
    """Ten Philox rounds on counter (c0..c3) under key (k0, k1)."""
    k0 = uint64(k0)
    k1 = uint64(k1)
    c0 = uint64(c0)
    c1 = uint64(c1)
    c2 = uint64(c2)
    c3 = uint64(c3)
    for r in range(10):
        if r > 0:
            k0 += _W0
            k1 += _W1
        hi0, lo0 = _mulhilo(_M0, c0)
        hi1, lo1 = _mulhilo(_M1, c2)
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


@njit(cache=True, inline="always")
def _unit(r):
    # open interval (0, 1): never exactly 0, so log() below is safe
    return (float(r >> _S11) + 0.5) * _TWO_M53


@njit(cache=True, nogil=True)
def uniforms(seed, streams, tag, block, out):
    """out[i, :] = four U(0,1) draws for stream streams[i]."""
    s = uint64(seed)
    for i in range(streams.size):
        r0, r1, r2, r3 = philox_block(s, uint64(streams[i]), uint64(block), uint64(tag),
                                      uint64(0), uint64(0))
        out[i, 0] = _unit(r0)
        out[i, 1] = _unit(r1)
        out[i, 2] = _unit(r2)
        out[i, 3] = _unit(r3)


@njit(cache=True, inline="always")
def normal4(seed, stream, tag, block):
    """Four N(0,1) draws (two Box-Muller pairs) from one counter block."""
    r0, r1, r2, r3 = philox_block(seed, uint64(stream), uint64(block), uint64(tag),
                                  uint64(0), uint64(0))
    u1 = _unit(r1)
    u3 = _unit(r3)
    m0 = np.sqrt(-2.0 * np.log(_unit(r0)))
    m1 = np.sqrt(-2.0 * np.log(_unit(r2)))
    return (m0 * np.cos(_TWO_PI * u1), m0 * np.sin(_TWO_PI * u1),
            m1 * np.cos(_TWO_PI * u3), m1 * np.sin(_TWO_PI * u3))


@njit(cache=True, inline="always")
def uniform0(seed, stream, tag, block):
    r0, r1, r2, r3 = philox_block(seed, uint64(stream), uint64(block), uint64(tag),
                                  uint64(0), uint64(0))
    return _unit(r0)


@njit(cache=True, nogil=True)
def normals(seed, streams, tag, block, out):
    """out[i, :] = normal4 for stream streams[i]."""
    s = uint64(seed)
    for i in range(streams.size):
        out[i, 0], out[i, 1], out[i, 2], out[i, 3] = normal4(s, streams[i], tag, block)


def uniform_block(seed: int, streams: np.ndarray, tag: int, block: int) -> np.ndarray:
    out = np.empty((streams.size, 4))
    uniforms(np.uint64(seed), np.ascontiguousarray(streams, dtype=np.int64), tag, block, out)
    return out


def normal_block(seed: int, streams: np.ndarray, tag: int, block: int) -> np.ndarray:
    out = np.empty((streams.size, 4))
    normals(np.uint64(seed), np.ascontiguousarray(streams, dtype=np.int64), tag, block, out)
    return out
