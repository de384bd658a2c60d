import numpy as np
import pytest
from scipy import stats

from dualinspect import rng

MASK = (1 << 64) - 1


def splitmix64_reference(seed, n):
    """Plain sequential SplitMix64."""
    out, state = [], seed
    for _ in range(n):
        state = (state + 0x9E3779B97F4A7C15) & MASK
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        out.append(z ^ (z >> 31))
    return out


@pytest.mark.parametrize("seed", [0, 1, 12345, MASK])
def test_derive_matches_sequential_splitmix(seed):
    got = rng.derive(seed, np.arange(8))
    assert [int(v) for v in got] == splitmix64_reference(seed, 8)


def test_known_first_output():
    # first output of SplitMix64 seeded with 0
    assert int(rng.derive(0, 0)) == 0xE220A8397B1DCDAF


def test_seed_validation():
    with pytest.raises(ValueError):
        rng.check_seed(-1)
    with pytest.raises(ValueError):
        rng.check_seed(1 << 64)


def test_uniforms_open_interval():
    u = rng.uniforms(rng.derive(7, np.arange(100_000)), 0)
    assert u.min() > 0.0 and u.max() < 1.0
    assert stats.kstest(u, "uniform").pvalue > 1e-3


def test_poisson_streams_do_not_depend_on_batching():
    seeds = rng.derive(99, np.arange(1000))
    for mean in (0.3, 4.0, 29.0, 31.0, 250.0):
        whole = rng.poisson_from_stream(mean, seeds, 1)
        parts = np.concatenate([rng.poisson_from_stream(mean, seeds[i:i + 137], 1)
                                for i in range(0, 1000, 137)])
        np.testing.assert_array_equal(whole, parts)


@pytest.mark.parametrize("mean", [0.5, 6.0, 30.0, 30.5, 80.0])
def test_poisson_distribution(mean):
    n = 200_000
    x = rng.poisson_from_stream(mean, rng.derive(2024, np.arange(n)), 0)
    assert abs(x.mean() - mean) < 4 * np.sqrt(mean / n)
    assert x.var() == pytest.approx(mean, rel=0.03)
    lo, hi = int(stats.poisson.ppf(0.001, mean)), int(stats.poisson.isf(0.001, mean))
    ks = np.arange(lo, hi + 1)
    observed = np.array([(x == k).sum() for k in ks])
    expected = n * stats.poisson.pmf(ks, mean)
    chi2 = ((observed - expected) ** 2 / expected).sum()
    assert stats.chi2.sf(chi2, len(ks) - 1) > 1e-4


def test_components_are_distinct_streams():
    seeds = rng.derive(5, np.arange(5000))
    a = rng.poisson_from_stream(10.0, seeds, 0)
    b = rng.poisson_from_stream(10.0, seeds, 1)
    assert not np.array_equal(a, b)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.05
