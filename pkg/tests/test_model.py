import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from dualinspect.errors import DomainError, SampleSizeError
from dualinspect.model import (CountSample, FullCountSample, ModelParams, log_pmf, pmf,
                               pmf_oracle, sample_counts, sample_full)

params_st = st.builds(ModelParams,
                      st.floats(0.05, 40.0),
                      st.floats(0.01, 0.99),
                      st.floats(0.01, 0.99))


def test_params_validation():
    with pytest.raises(DomainError):
        ModelParams(0.0, 0.5, 0.5)
    with pytest.raises(DomainError):
        ModelParams(1.0, 1.2, 0.5)
    with pytest.raises(DomainError):
        ModelParams(float("nan"), 0.5, 0.5)
    p = ModelParams(10.0, 0.4, 0.7)
    assert (p.theta1, p.theta2, p.theta12) == pytest.approx((1.2, 4.2, 2.8))
    assert p.swapped() == ModelParams(10.0, 0.7, 0.4)


def test_pmf_examples():
    assert pmf(ModelParams(1.0, 1.0, 1.0), (0, 0)) == pytest.approx(math.exp(-1), rel=1e-14)
    assert pmf(ModelParams(5.0, 0.3, 0.0), (2, 0)) == pytest.approx(
        math.exp(-1.5) * 1.5 ** 2 / 2, rel=1e-14)
    p = ModelParams(10.0, 0.4, 0.7)
    assert pmf(p, (3, 6)) == pytest.approx(pmf_oracle(p, (3, 6)), rel=1e-12)


def test_oracle_examples():
    assert pmf_oracle(ModelParams(1.0, 1.0, 1.0), (0, 0)) == pytest.approx(math.exp(-1), rel=1e-14)
    assert pmf_oracle(ModelParams(2.0, 0.5, 0.5), (0, 0)) == pytest.approx(math.exp(-1.5), rel=1e-13)


def test_boundary_probabilities():
    p = ModelParams(4.0, 1.0, 1.0)
    assert pmf(p, (2, 3)) == 0.0
    assert pmf(p, (3, 3)) == pytest.approx(stats.poisson.pmf(3, 4.0), rel=1e-13)
    assert pmf(ModelParams(4.0, 0.0, 0.5), (1, 0)) == 0.0


def test_pmf_matches_oracle_on_grid():
    worst = 0.0
    for lam, p1, p2 in itertools.product((0.5, 2.0, 10.0), (0.1, 0.5, 0.9), (0.1, 0.5, 0.9)):
        params = ModelParams(lam, p1, p2)
        for r1, r2 in itertools.product(range(16), repeat=2):
            worst = max(worst, abs(pmf(params, (r1, r2)) - pmf_oracle(params, (r1, r2))))
    assert worst <= 1e-10


@settings(max_examples=60, deadline=None)
@given(params_st)
def test_normalization_and_marginals(params):
    hi1 = int(stats.poisson.isf(1e-15, params.theta1 + params.theta12)) + 5
    hi2 = int(stats.poisson.isf(1e-15, params.theta2 + params.theta12)) + 5
    r1, r2 = np.meshgrid(np.arange(hi1 + 1), np.arange(hi2 + 1), indexing="ij")
    P = np.exp(log_pmf(params, r1, r2))
    assert P.sum() == pytest.approx(1.0, abs=1e-10)
    m1 = stats.poisson.pmf(np.arange(hi1 + 1), params.lam * params.p1)
    m2 = stats.poisson.pmf(np.arange(hi2 + 1), params.lam * params.p2)
    np.testing.assert_allclose(P.sum(axis=1), m1, atol=1e-10)
    np.testing.assert_allclose(P.sum(axis=0), m2, atol=1e-10)


@settings(max_examples=100, deadline=None)
@given(params_st, st.integers(0, 40), st.integers(0, 40))
def test_swap_symmetry_is_exact(params, r1, r2):
    assert log_pmf(params, r1, r2) == log_pmf(params.swapped(), r2, r1)


def test_log_pmf_vectorized_and_domain():
    p = ModelParams(3.0, 0.3, 0.6)
    r1, r2 = np.array([0, 1, 5]), np.array([2, 1, 0])
    vec = log_pmf(p, r1, r2)
    np.testing.assert_array_equal(vec, [log_pmf(p, a, b) for a, b in zip(r1, r2)])
    with pytest.raises(DomainError):
        pmf(p, (-1, 0))


def test_sample_zero_rates():
    s = sample_counts(ModelParams(10.0, 0.0, 0.0), 5, seed=1)
    assert s.r1.tolist() == [0] * 5 and s.r2.tolist() == [0] * 5
    f = sample_full(ModelParams(10.0, 1.0, 1.0), 3, seed=1)
    assert f.x1.tolist() == [0] * 3 and f.x2.tolist() == [0] * 3


def test_sample_moments():
    p = ModelParams(10.0, 0.4, 0.7)
    m = 100_000
    f = sample_full(p, m, seed=11)
    s = f.collapse()
    assert abs(s.r1.mean() - 4.0) < 3 * math.sqrt(4.0 / m)
    assert abs(f.y.mean() - 2.8) < 3 * math.sqrt(2.8 / m)
    assert abs(np.cov(s.r1, s.r2)[0, 1] - 2.8) < 0.1


def test_sampling_determinism_and_collapse():
    p = ModelParams(10.0, 0.4, 0.7)
    assert sample_counts(p, 50, seed=3) == sample_counts(p, 50, seed=3)
    assert sample_counts(p, 50, seed=3) != sample_counts(p, 50, seed=4)
    assert sample_full(p, 50, seed=3).collapse() == sample_counts(p, 50, seed=3)
    # prefix stability: item i depends only on (seed, i)
    assert sample_counts(p, 80, seed=3).r1[:50].tolist() == sample_counts(p, 50, seed=3).r1.tolist()


def test_sample_size_errors():
    p = ModelParams(1.0, 0.5, 0.5)
    with pytest.raises(SampleSizeError):
        sample_counts(p, 1, seed=0)
    with pytest.raises(SampleSizeError):
        CountSample.from_pairs([(1, 1)])


def test_samples_are_read_only():
    s = CountSample.from_pairs([(1, 2), (3, 4)])
    with pytest.raises(ValueError):
        s.r1[0] = 5
    f = FullCountSample.from_triples([(1, 2, 3), (0, 1, 1)])
    assert f.collapse() == CountSample.from_pairs([(4, 5), (1, 2)])
