"""Dual-inspection count model.

Each item carries ``N ~ Poisson(lam)`` defects. Inspector ``i`` finds each one
independently with probability ``p_i``. Splitting the defects by who found
them gives three independent Poisson counts::

    X1 ~ Poisson(lam * p1 * (1 - p2))   # found only by inspector 1
    X2 ~ Poisson(lam * p2 * (1 - p1))   # found only by inspector 2
    Y  ~ Poisson(lam * p1 * p2)         # found by both

and the observed pair is ``(R1, R2) = (X1 + Y, X2 + Y)``, a bivariate Poisson.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import stats
from scipy.special import xlogy

from . import rng
from .errors import DomainError, SampleSizeError
from .special import log_factorial, logsumexp

__all__ = [
    "ModelParams", "CountPair", "LatentTriple", "CountSample", "FullCountSample",
    "log_pmf", "pmf", "pmf_oracle", "sample_counts", "sample_full", "draw_latent",
]


@dataclass(frozen=True)
class ModelParams:
    """Defect rate ``lam`` and detection probabilities ``p1``, ``p2``.

    Boundary detection probabilities (0 or 1) are accepted here; estimation
    code that needs interior values checks for them itself.
    """

    lam: float
    p1: float
    p2: float

    def __post_init__(self):
        for name in ("lam", "p1", "p2"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (self.lam > 0 and np.isfinite(self.lam)):
            raise DomainError(f"lam must be positive and finite, got {self.lam}")
        for name in ("p1", "p2"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {p}")

    @property
    def theta1(self) -> float:
        return self.lam * self.p1 * (1.0 - self.p2)

    @property
    def theta2(self) -> float:
        return self.lam * self.p2 * (1.0 - self.p1)

    @property
    def theta12(self) -> float:
        # p1 * p2 first so that swapping the inspectors gives identical bits
        return self.lam * (self.p1 * self.p2)

    def is_interior(self) -> bool:
        return 0.0 < self.p1 < 1.0 and 0.0 < self.p2 < 1.0

    def swapped(self) -> "ModelParams":
        return ModelParams(self.lam, self.p2, self.p1)

    def as_tuple(self) -> tuple:
        return (self.lam, self.p1, self.p2)


class CountPair(NamedTuple):
    r1: int
    r2: int


class LatentTriple(NamedTuple):
    x1: int
    x2: int
    y: int


def _as_counts(values, name: str) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if arr.size and arr.dtype.kind not in "iu":
        if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
            raise ValueError(f"{name} must contain integers")
    arr = arr.astype(np.int64)
    if np.any(arr < 0):
        raise ValueError(f"{name} must be nonnegative")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class CountSample:
    """Observed defect counts ``(r1, r2)`` for ``m >= 2`` items."""

    r1: np.ndarray
    r2: np.ndarray

    def __post_init__(self):
        r1 = _as_counts(self.r1, "r1")
        r2 = _as_counts(self.r2, "r2")
        if r1.shape != r2.shape:
            raise ValueError("r1 and r2 must have the same length")
        if r1.size < 2:
            raise SampleSizeError(f"need at least 2 items, got {r1.size}")
        object.__setattr__(self, "r1", r1)
        object.__setattr__(self, "r2", r2)

    @classmethod
    def from_pairs(cls, pairs) -> "CountSample":
        pairs = list(pairs)
        return cls([p[0] for p in pairs], [p[1] for p in pairs])

    @property
    def m(self) -> int:
        return int(self.r1.size)

    def __len__(self) -> int:
        return self.m

    def __iter__(self):
        return (CountPair(int(a), int(b)) for a, b in zip(self.r1, self.r2))

    def __eq__(self, other):
        if not isinstance(other, CountSample):
            return NotImplemented
        return np.array_equal(self.r1, other.r1) and np.array_equal(self.r2, other.r2)


@dataclass(frozen=True, eq=False)
class FullCountSample:
    """Counts split by detection pattern, as needed by capture-recapture."""

    x1: np.ndarray
    x2: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        cols = [_as_counts(getattr(self, n), n) for n in ("x1", "x2", "y")]
        if not cols[0].shape == cols[1].shape == cols[2].shape:
            raise ValueError("x1, x2 and y must have the same length")
        if cols[0].size < 2:
            raise SampleSizeError(f"need at least 2 items, got {cols[0].size}")
        for name, col in zip(("x1", "x2", "y"), cols):
            object.__setattr__(self, name, col)

    @classmethod
    def from_triples(cls, triples) -> "FullCountSample":
        triples = list(triples)
        return cls([t[0] for t in triples], [t[1] for t in triples], [t[2] for t in triples])

    @property
    def m(self) -> int:
        return int(self.y.size)

    def __len__(self) -> int:
        return self.m

    def __iter__(self):
        return (LatentTriple(int(a), int(b), int(c)) for a, b, c in zip(self.x1, self.x2, self.y))

    def __eq__(self, other):
        if not isinstance(other, FullCountSample):
            return NotImplemented
        return all(np.array_equal(getattr(self, n), getattr(other, n)) for n in ("x1", "x2", "y"))

    def collapse(self) -> CountSample:
        """Forget the joint detections: ``(x1 + y, x2 + y)`` per item."""
        return CountSample(self.x1 + self.y, self.x2 + self.y)


def _log_poisson(k, mean):
    return xlogy(k, mean) - mean - log_factorial(k)


def log_pmf(params: ModelParams, r1, r2) -> np.ndarray:
    """Natural log of ``P(R1 = r1, R2 = r2)``, vectorized over the counts.

    Sums the three-Poisson convolution over the number ``l`` of jointly found
    defects in log space. Valid for boundary ``p_i``; impossible pairs give
    ``-inf``.
    """
    r1 = np.asarray(r1, dtype=np.int64)
    r2 = np.asarray(r2, dtype=np.int64)
    r1, r2 = np.broadcast_arrays(r1, r2)
    if np.any(r1 < 0) or np.any(r2 < 0):
        raise DomainError("counts must be nonnegative")
    t1, t2, t12 = params.theta1, params.theta2, params.theta12
    low = np.minimum(r1, r2)
    lmax = int(low.max()) if low.size else 0
    l = np.arange(lmax + 1)
    shape = r1.shape + (1,)
    a = r1.reshape(shape) - l
    b = r2.reshape(shape) - l
    valid = (a >= 0) & (b >= 0)
    a = np.where(valid, a, 0)
    b = np.where(valid, b, 0)
    with np.errstate(invalid="ignore"):
        joint = xlogy(l, t12) - log_factorial(l)
        # the two single-inspector terms are added first so that relabelling
        # the inspectors reproduces the same floating-point sum
        single = ((xlogy(a, t1) - log_factorial(a)) + (xlogy(b, t2) - log_factorial(b)))
        terms = np.where(valid, joint + single, -np.inf)
    out = logsumexp(terms, axis=-1) - (t12 + (t1 + t2))
    return out


def pmf(params: ModelParams, pair) -> float:
    """``P(R1 = r1, R2 = r2)`` for a single pair."""
    r1, r2 = pair
    if r1 < 0 or r2 < 0:
        raise DomainError("counts must be nonnegative")
    return float(np.exp(log_pmf(params, r1, r2)))


def pmf_oracle(params: ModelParams, pair, tail_eps: float = 1e-14) -> float:
    """Brute-force ``P(r1, r2)``: sum over the true defect count ``n``.

    Independent of :func:`pmf`; intended as a cross-check. The sum runs from
    ``max(r1, r2)`` until the Poisson(lam) tail falls below ``tail_eps``.
    """
    if not 0.0 < tail_eps <= 1e-6:
        raise DomainError("tail_eps must lie in (0, 1e-6]")
    r1, r2 = int(pair[0]), int(pair[1])
    n_hi = max(int(stats.poisson.isf(tail_eps, params.lam)) + 1, max(r1, r2))
    while stats.poisson.sf(n_hi, params.lam) >= tail_eps:
        n_hi += 1
    n = np.arange(max(r1, r2), n_hi + 1)
    terms = (stats.poisson.pmf(n, params.lam)
             * stats.binom.pmf(r1, n, params.p1)
             * stats.binom.pmf(r2, n, params.p2))
    return float(np.sum(terms))


def draw_latent(params: ModelParams, item_seeds) -> tuple:
    """Draw ``(x1, x2, y)`` for every item seed (any array shape)."""
    item_seeds = np.asarray(item_seeds, dtype=np.uint64)
    x1 = rng.poisson_from_stream(params.theta1, item_seeds, 0)
    x2 = rng.poisson_from_stream(params.theta2, item_seeds, 1)
    y = rng.poisson_from_stream(params.theta12, item_seeds, 2)
    return x1, x2, y


def _item_seeds(seed, m: int) -> np.ndarray:
    if m < 2:
        raise SampleSizeError(f"need at least 2 items, got {m}")
    return rng.derive(rng.check_seed(seed), np.arange(m))


def sample_full(params: ModelParams, m: int, seed: int) -> FullCountSample:
    """Simulate ``m`` items and keep the split counts ``(x1, x2, y)``.

    Item ``i`` uses the stream ``derive(seed, i)``, so the result does not
    depend on how items are batched.
    """
    x1, x2, y = draw_latent(params, _item_seeds(seed, m))
    return FullCountSample(x1, x2, y)


def sample_counts(params: ModelParams, m: int, seed: int) -> CountSample:
    """Simulate ``m`` observed pairs; equals ``sample_full(...).collapse()``."""
    return sample_full(params, m, seed).collapse()
