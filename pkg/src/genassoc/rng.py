"""Counter-based random numbers: Philox4x64-10 keyed by (seed, stream), counter = replicate.

Replicate ``i`` of a study always sees the same four 64-bit words no matter
which worker processes it or in which order, which is what makes simulation
results independent of the degree of parallelism.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, uint64

_M0 = uint64(0xD2E7470EE14C6C93)
_M1 = uint64(0xCA5A826395121157)
_W0 = uint64(0x9E3779B97F4A7C15)
_W1 = uint64(0xBB67AE8584CAA73B)
_MASK32 = uint64(0xFFFFFFFF)
_S32 = uint64(32)
_S11 = uint64(11)
_TWO_M53 = 1.0 / 9007199254740992.0


@njit(cache=True)
def _mulhilo(a, b):
    a_lo = a & _MASK32
    a_hi = a >> _S32
    b_lo = b & _MASK32
    b_hi = b >> _S32
    ll = a_lo * b_lo
    lh = a_lo * b_hi
    hl = a_hi * b_lo
    hh = a_hi * b_hi
    mid = (ll >> _S32) + (lh & _MASK32) + (hl & _MASK32)
    hi = hh + (lh >> _S32) + (hl >> _S32) + (mid >> _S32)
    return hi, a * b


@njit(cache=True)
def philox4x64(c0, c1, c2, c3, k0, k1):
    """Ten Philox rounds on counter (c0..c3) under key (k0, k1)."""
    for r in range(10):
        if r > 0:
            k0 = k0 + _W0
            k1 = k1 + _W1
        hi0, lo0 = _mulhilo(_M0, c0)
        hi1, lo1 = _mulhilo(_M1, c2)
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


@njit(cache=True)
def to_unit(word):
    """Uniform double in [0, 1) from the top 53 bits."""
    return float(word >> _S11) * _TWO_M53


@njit(cache=True)
def replicate_uniforms(seed, stream, index, out):
    """Four uniforms for replicate ``index`` of stream ``stream``."""
    w0, w1, w2, w3 = philox4x64(uint64(index), uint64(0), uint64(0), uint64(0),
                                uint64(seed), uint64(stream))
    out[0] = to_unit(w0)
    out[1] = to_unit(w1)
    out[2] = to_unit(w2)
    out[3] = to_unit(w3)


@njit(cache=True)
def binomial_from_uniform(n, p, u, lf):
    """Bin(n, p) variate from a single uniform ``u``.

    Outcomes are visited from the mode outwards, always stepping to the more
    probable neighbour, and the first one at which the accumulated mass passes
    ``u`` is returned.  Every outcome therefore receives exactly its own mass.
    Cost is O(standard deviation).
    """
    if n == 0 or p <= 0.0:
        return 0
    if p >= 1.0:
        return n
    q = 1.0 - p
    mode = int(math.floor((n + 1) * p))
    if mode > n:
        mode = n
    log_pm = (lf[n] - lf[mode] - lf[n - mode] + mode * math.log(p)
              + (n - mode) * math.log1p(-p))
    pm = math.exp(log_pm)
    acc = pm
    if u < acc:
        return mode
    left = mode - 1
    right = mode + 1
    p_left = pm * mode * q / ((n - mode + 1) * p) if left >= 0 else 0.0
    p_right = pm * (n - mode) * p / ((mode + 1) * q) if right <= n else 0.0
    last = mode
    while left >= 0 or right <= n:
        if right <= n and (left < 0 or p_right >= p_left):
            acc += p_right
            last = right
            if u < acc:
                return right
            p_right = p_right * (n - right) * p / ((right + 1) * q)
            right += 1
        else:
            acc += p_left
            last = left
            if u < acc:
                return left
            p_left = p_left * left * q / ((n - left + 1) * p)
            left -= 1
    return last


@njit(cache=True)
def trinomial_from_uniforms(n, p0, p1, p2, u_first, u_second, lf):
    """(c0, c1, c2) ~ Multinomial(n; p0, p1, p2) via two sequential binomials."""
    c0 = binomial_from_uniform(n, p0, u_first, lf)
    rest = n - c0
    tail = p1 + p2
    c1 = 0
    if rest > 0 and tail > 0.0:
        c1 = binomial_from_uniform(rest, min(p1 / tail, 1.0), u_second, lf)
    return c0, c1, rest - c1


def philox_block(seed: int, stream: int, index: int) -> tuple[int, int, int, int]:
    return tuple(int(w) for w in philox4x64(np.uint64(index), np.uint64(0), np.uint64(0),
                                             np.uint64(0), np.uint64(seed), np.uint64(stream)))
