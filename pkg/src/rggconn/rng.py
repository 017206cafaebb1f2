"""Counter-based random number generation with derived substreams.

Every random quantity in this package is drawn from a Stream: a keyed
counter generator in the SplitMix64 family.  Output i is

    mix64(key + gamma * (i + 1))        (all arithmetic mod 2**64)

where mix64 is the SplitMix64 finalizer and gamma is an odd per-stream
increment derived from the key.  Because the i-th output is a pure
function of (key, i), a stream can be evaluated in blocks, out of
order, or on different workers and always yields the same sequence.
Substreams are derived by hashing (parent_key, index), so trial t of a
campaign owns stream derive_key(master_seed, t) no matter which thread
runs it or in which order.

Poisson sampling is exact for every mean: sequential inversion
(product-of-uniforms) below SMALL_MEAN_CUTOFF, and Hormann's PTRS
transformed-rejection sampler above it.  No normal approximation is
used anywhere.
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15  # 2**64 / phi, the SplitMix64 increment
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB
_DERIVE_SALT = 0x6A09E667F3BCC909
_GAMMA_SALT = 0xBB67AE8584CAA73B

# Exact-method switch point; inversion needs exp(-mean) > 0 and O(mean)
# uniforms, PTRS is O(1) and valid for mean >= 10.
SMALL_MEAN_CUTOFF = 30.0

_INV_2_53 = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a 64-bit integer."""
    z &= MASK64
    z ^= z >> 30
    z = (z * _MIX_A) & MASK64
    z ^= z >> 27
    z = (z * _MIX_B) & MASK64
    z ^= z >> 31
    return z


def _mix64_block(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= np.uint64(_MIX_A)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_MIX_B)
    z ^= z >> np.uint64(31)
    return z


def derive_key(parent_key: int, index: int) -> int:
    """Substream key for (parent_key, index); deterministic and order-free.

    derive_key(parent, i) = mix64(mix64(parent + (i+1)*GOLDEN) ^ salt).
    The extra salted mix separates the key domain from raw stream output.
    """
    if index < 0:
        raise ValueError("substream index must be non-negative")
    z = (parent_key + GOLDEN * (index + 1)) & MASK64
    return mix64(mix64(z) ^ _DERIVE_SALT)


class Stream:
    """Keyed counter stream; all draws are pure functions of (key, counter)."""

    __slots__ = ("key", "gamma", "counter")

    def __init__(self, key: int, counter: int = 0):
        self.key = key & MASK64
        # distinct odd increment per key, so differently keyed streams walk
        # different orbits rather than shifted copies of one orbit
        self.gamma = mix64(self.key ^ _GAMMA_SALT) | 1
        self.counter = counter

    def substream(self, index: int) -> "Stream":
        return Stream(derive_key(self.key, index))

    def raw_block(self, n: int) -> np.ndarray:
        """Next n raw 64-bit outputs as a uint64 array."""
        if n < 0:
            raise ValueError("block size must be non-negative")
        idx = np.arange(self.counter + 1, self.counter + n + 1, dtype=np.uint64)
        self.counter += n
        x = np.uint64(self.key) + np.uint64(self.gamma) * idx
        return _mix64_block(x)

    def raw(self) -> int:
        self.counter += 1
        return mix64((self.key + self.gamma * self.counter) & MASK64)

    def uniforms(self, n: int) -> np.ndarray:
        """Next n doubles, uniform on [0, 1), 53-bit mantissas."""
        return (self.raw_block(n) >> np.uint64(11)).astype(np.float64) * _INV_2_53

    def uniform(self) -> float:
        return (self.raw() >> 11) * _INV_2_53


def stream(seed: int) -> Stream:
    """Root stream for a 64-bit seed."""
    return Stream(seed)


def substream(master_seed: int, *indices: int) -> Stream:
    """Stream addressed by a path of indices under a master seed."""
    key = master_seed & MASK64
    for i in indices:
        key = derive_key(key, i)
    return Stream(key)


def _poisson_inversion(mean: float, s: Stream) -> int:
    # Knuth's product-of-uniforms inversion; exact, O(mean) uniforms.
    limit = math.exp(-mean)
    prod = 1.0
    count = 0
    while True:
        prod *= s.uniform()
        if prod <= limit:
            return count
        count += 1


def _poisson_ptrs(mean: float, s: Stream) -> int:
    # Hormann's PTRS transformed rejection; exact for mean >= 10.
    slam = math.sqrt(mean)
    loglam = math.log(mean)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    invalpha = 1.1239 + 1.1328 / (b - 3.4)
    vr = 0.9277 - 3.6224 / (b - 2.0)
    while True:
        u = s.uniform() - 0.5
        v = s.uniform()
        us = 0.5 - abs(u)
        k = math.floor((2.0 * a / us + b) * u + mean + 0.43)
        if us >= 0.07 and v <= vr:
            return int(k)
        if k < 0 or (us < 0.013 and v > us):
            continue
        lhs = math.log(v) + math.log(invalpha) - math.log(a / (us * us) + b)
        if lhs <= k * loglam - mean - math.lgamma(k + 1.0):
            return int(k)


def poisson_count(mean: float, s: Stream) -> int:
    """One exact Poisson(mean) variate drawn from stream s."""
    if not math.isfinite(mean) or mean < 0.0:
        raise ValueError(f"Poisson mean must be finite and non-negative, got {mean}")
    if mean == 0.0:
        return 0
    if mean < SMALL_MEAN_CUTOFF:
        return _poisson_inversion(mean, s)
    return _poisson_ptrs(mean, s)
