"""Counter-based random streams built on SplitMix64.

SplitMix64 (Steele, Lea & Flood, 2014) advances a 64-bit state by the golden
gamma ``0x9E3779B97F4A7C15`` and scrambles it with a fixed finalizer, so the
n-th output of a stream seeded with ``s`` is ``finalize(s + (n + 1) * gamma)``
and can be computed directly. Every stream used in this package is derived
that way:

* ``derive(seed, i)`` -- the seed of replicate ``i`` or item ``i``;
* ``uniforms(item_seed, k)`` -- the k-th uniform of an item.

Because nothing depends on a running state, a block of items can be generated
in any order or in separate processes and still give bit-identical output.
"""

import numpy as np
from scipy.special import gammaln

__all__ = ["GOLDEN_GAMMA", "MASK64", "check_seed", "derive", "uniforms",
           "poisson_inversion", "poisson_ptrs", "poisson_from_stream",
           "INVERSION_MAX_MEAN"]

GOLDEN_GAMMA = np.uint64(0x9E3779B97F4A7C15)
MASK64 = (1 << 64) - 1
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = (np.uint64(s) for s in (30, 27, 31, 11))

# Poisson means up to this value use inversion; larger means use PTRS.
INVERSION_MAX_MEAN = 30.0

# Counter layout inside one item stream: component c draws from
# [c * _COMPONENT_STRIDE, (c + 1) * _COMPONENT_STRIDE).
_COMPONENT_STRIDE = np.uint64(1 << 32)


def check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed <= MASK64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def _finalize(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def derive(seed, index) -> np.ndarray:
    """Element ``index`` of the SplitMix64 stream seeded with ``seed``.

    Both arguments broadcast; the result is a ``uint64`` array.
    """
    seed = np.asarray(seed, dtype=np.uint64)
    index = np.asarray(index, dtype=np.uint64)
    with np.errstate(over="ignore"):
        state = seed + (index + np.uint64(1)) * GOLDEN_GAMMA
    return _finalize(state)


def uniforms(item_seeds, counter) -> np.ndarray:
    """Uniform doubles in the open interval (0, 1), 53 bits each."""
    bits = derive(item_seeds, counter) >> _S11
    return (bits.astype(np.float64) + 0.5) * (1.0 / 9007199254740992.0)


def _poisson_cdf_table(mean: float) -> np.ndarray:
    size = int(mean + 15.0 * np.sqrt(mean) + 40.0)
    pmf = np.empty(size)
    pmf[0] = np.exp(-mean)
    for k in range(1, size):
        pmf[k] = pmf[k - 1] * mean / k
    cdf = np.cumsum(pmf)
    cdf[-1] = 1.0
    return cdf


def poisson_inversion(mean: float, u: np.ndarray) -> np.ndarray:
    """Poisson variates by inversion: the smallest k with ``F(k) >= u``.

    Equivalent to sequential search over the cumulative table; the table
    ends where the remaining tail is far below double resolution.
    """
    if mean == 0.0:
        return np.zeros(np.shape(u), dtype=np.int64)
    cdf = _poisson_cdf_table(mean)
    return np.searchsorted(cdf, u, side="left").astype(np.int64)


def poisson_ptrs(mean: float, item_seeds: np.ndarray, base_counter) -> np.ndarray:
    """Poisson variates by Hörmann's transformed rejection with squeeze.

    Attempt ``j`` of an item consumes uniforms ``base + 2j`` and ``base + 2j + 1``
    of that item's stream, so the result of each item depends only on its
    own seed.
    """
    item_seeds = np.asarray(item_seeds, dtype=np.uint64)
    base = np.uint64(base_counter)
    out = np.empty(item_seeds.shape, dtype=np.int64)
    pending = np.arange(item_seeds.size)
    flat_seeds = item_seeds.ravel()
    flat_out = out.ravel()

    slam = np.sqrt(mean)
    loglam = np.log(mean)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    invalpha = 1.1239 + 1.1328 / (b - 3.4)
    vr = 0.9277 - 3.6224 / (b - 2.0)

    attempt = 0
    while pending.size:
        seeds = flat_seeds[pending]
        counter = base + np.uint64(2 * attempt)
        U = uniforms(seeds, counter) - 0.5
        V = uniforms(seeds, counter + np.uint64(1))
        us = 0.5 - np.abs(U)
        k = np.floor((2.0 * a / us + b) * U + mean + 0.43)
        quick = (us >= 0.07) & (V <= vr)
        reject = (k < 0) | ((us < 0.013) & (V > us))
        kk = np.maximum(k, 0.0)
        with np.errstate(divide="ignore"):
            log_accept = (np.log(V) + np.log(invalpha) - np.log(a / (us * us) + b)
                          <= -mean + kk * loglam - gammaln(kk + 1.0))
        accept = quick | (~reject & log_accept)
        flat_out[pending[accept]] = k[accept].astype(np.int64)
        pending = pending[~accept]
        attempt += 1
    return flat_out.reshape(item_seeds.shape)


def poisson_from_stream(mean: float, item_seeds: np.ndarray, component: int) -> np.ndarray:
    """Draw one Poisson(mean) variate per item from its ``component`` sub-stream."""
    item_seeds = np.asarray(item_seeds, dtype=np.uint64)
    base = np.uint64(component) * _COMPONENT_STRIDE
    if mean <= INVERSION_MAX_MEAN:
        return poisson_inversion(mean, uniforms(item_seeds, base))
    return poisson_ptrs(mean, item_seeds, base)
