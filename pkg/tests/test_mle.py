import itertools
import math

import numpy as np
import pytest
from scipy import optimize

from dualinspect.errors import (DomainError, InvalidInputError, NoInteriorMaximumError,
                                UndefinedEstimatorError)
from dualinspect.mle import (LikelihoodContext, fisher_information, log_likelihood,
                             mle_asymptotic_variance, mle_confidence_intervals,
                             mle_scalar_residual, psi, psi_prime, score_equations, solve_mle)
from dualinspect.model import CountSample, ModelParams, log_pmf, sample_counts
from dualinspect.moment import moment_asymptotic_variance
from dualinspect.special import normal_quantile


def ctx_of(pairs):
    return LikelihoodContext.from_pairs(pairs)


def test_psi_examples():
    for z in (0.1, 1.0, 7.0):
        assert psi(z, ctx_of([(0, 0)])) == 0.0
        assert psi_prime(z, ctx_of([(0, 0)])) == 0.0
        assert psi(z, ctx_of([(1, 1)])) == pytest.approx(math.log(1 + 1 / z), rel=1e-14)
        assert psi(z, ctx_of([(1, 1), (0, 0)])) == pytest.approx(0.5 * math.log(1 + 1 / z), rel=1e-14)
    assert psi(1.0, ctx_of([(1, 1)])) == pytest.approx(math.log(2), rel=1e-15)
    assert psi_prime(2.0, ctx_of([(1, 1)])) == pytest.approx(-1 / 6, rel=1e-14)
    with pytest.raises(DomainError):
        psi(0.0, ctx_of([(1, 1)]))


def test_psi_prime_finite_difference(seeded_sample):
    ctxs = [ctx_of([(2, 3), (1, 1), (3, 4), (0, 2)]), LikelihoodContext.from_sample(seeded_sample),
            ctx_of([(40, 35), (12, 30), (0, 0)])]
    for ctx, z in itertools.product(ctxs, np.geomspace(0.01, 100, 9)):
        h = 1e-6 * z
        fd = (psi(z + h, ctx) - psi(z - h, ctx)) / (2 * h)
        assert fd == pytest.approx(psi_prime(z, ctx), rel=1e-6)


def test_log_likelihood_examples(table_params):
    zero = ctx_of([(0, 0), (0, 0)])
    for lam, p1, p2 in [(10.0, 0.4, 0.7), (0.3, 0.9, 0.05)]:
        want = -lam * (1 - (1 - p1) * (1 - p2))
        assert log_likelihood(ModelParams(lam, p1, p2), zero) == pytest.approx(want, rel=1e-14)
    s = sample_counts(table_params, 100, seed=8)
    ctx = LikelihoodContext.from_sample(s)
    for p in [table_params, ModelParams(7.0, 0.55, 0.8)]:
        assert log_likelihood(p, ctx) == pytest.approx(np.mean(log_pmf(p, s.r1, s.r2)), rel=1e-12)
    with pytest.raises(DomainError):
        log_likelihood(ModelParams(10.0, 1.0, 0.5), ctx)


def test_gradient_against_finite_differences():
    rs = np.random.default_rng(20240901)
    worst = 0.0
    for case in range(100):
        truth = ModelParams(rs.uniform(1, 30), rs.uniform(0.1, 0.9), rs.uniform(0.1, 0.9))
        ctx = LikelihoodContext.from_sample(sample_counts(truth, 50, seed=case))
        at = ModelParams(truth.lam * rs.uniform(0.7, 1.3), rs.uniform(0.1, 0.9), rs.uniform(0.1, 0.9))
        grad = score_equations(at, ctx)
        x = np.array(at.as_tuple())
        for i in range(3):
            e = np.zeros(3)
            e[i] = 1e-6
            fd = (log_likelihood(ModelParams(*(x + e)), ctx)
                  - log_likelihood(ModelParams(*(x - e)), ctx)) / 2e-6
            worst = max(worst, abs(fd - grad[i]) / max(1.0, abs(grad[i])))
    assert worst <= 1e-5


def test_reduction_identity(seeded_sample):
    ctx = LikelihoodContext.from_sample(seeded_sample)
    r1, r2 = ctx.r_bar_1, ctx.r_bar_2
    for lam in np.linspace(max(r1, r2) * 1.05, 40, 12):
        p1, p2 = r1 / lam, r2 / lam
        d_lam, d_p1, d_p2 = score_equations(ModelParams(lam, p1, p2), ctx)
        # (1 - p_i) dLL/dp_i + lam dLL/dlam = rbar_i / p_i - lam, which is 0 here
        assert abs((1 - p1) * d_p1 + lam * d_lam) <= 1e-10 * max(1.0, lam * abs(d_lam))
        assert abs((1 - p2) * d_p2 + lam * d_lam) <= 1e-10 * max(1.0, lam * abs(d_lam))
        # the profile derivative is -p1 p2 g(lam)
        assert d_lam == pytest.approx(-p1 * p2 * mle_scalar_residual(lam, ctx), rel=1e-9, abs=1e-13)


def test_residual_domain():
    ctx = ctx_of([(2, 3), (1, 1), (3, 4), (0, 2)])
    with pytest.raises(DomainError):
        mle_scalar_residual(2.5, ctx)
    with pytest.raises(DomainError):
        mle_scalar_residual(3.0, ctx_of([(0, 0), (0, 0)]))


def test_solver_residuals_and_stationarity():
    truth = ModelParams(10.0, 0.4, 0.7)
    for seed in range(25):
        s = sample_counts(truth, 200, seed=seed)
        ctx = LikelihoodContext.from_sample(s)
        try:
            est = solve_mle(ctx)
        except NoInteriorMaximumError:
            continue
        assert max(abs(r) for r in est.residuals) <= 1e-8
        assert abs(mle_scalar_residual(est.lambda_star, ctx)) <= 1e-10
        assert est.p1_star == pytest.approx(ctx.r_bar_1 / est.lambda_star, rel=1e-14)
        assert est.lambda_star > max(ctx.r_bar_1, ctx.r_bar_2)


def test_solver_matches_direct_maximization(seeded_sample):
    ctx = LikelihoodContext.from_sample(seeded_sample)
    est = solve_mle(ctx)

    def nll(x):
        lam, a, b = x
        return -log_likelihood(ModelParams(lam, 1 / (1 + math.exp(-a)), 1 / (1 + math.exp(-b))), ctx)

    logit = lambda p: math.log(p / (1 - p))
    res = optimize.minimize(nll, [12.0, logit(0.5), logit(0.5)], method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 20000})
    assert res.x[0] == pytest.approx(est.lambda_star, rel=1e-5)
    assert -res.fun <= log_likelihood(est.as_params(), ctx) + 1e-12
    assert abs(est.lambda_star - 10.0) <= 3 * 0.56


def test_solver_swap_symmetry(seeded_sample):
    a = solve_mle(seeded_sample)
    b = solve_mle(CountSample(seeded_sample.r2, seeded_sample.r1))
    assert b.lambda_star == pytest.approx(a.lambda_star, rel=1e-11)
    assert b.p1_star == pytest.approx(a.p2_star, rel=1e-11)


def test_solver_pathologies():
    with pytest.raises(NoInteriorMaximumError) as info:
        solve_mle(CountSample.from_pairs([(3, 3), (3, 3)]))
    assert info.value.kind == "no_interior_maximum"
    with pytest.raises(NoInteriorMaximumError):
        solve_mle(CountSample.from_pairs([(2, 3), (1, 1), (3, 4), (0, 2)]))
    with pytest.raises(UndefinedEstimatorError):
        solve_mle(CountSample.from_pairs([(0, 1), (0, 2)]))


@pytest.fixture(scope="module")
def fisher_table():
    return fisher_information(ModelParams(10.0, 0.4, 0.7))


def test_fisher_structure(fisher_table):
    I = fisher_table.entries
    np.testing.assert_array_equal(I, I.T)
    assert np.all(np.linalg.eigvalsh(I) > 0)
    assert fisher_table.captured_mass >= 1 - 1e-10
    swapped = fisher_information(ModelParams(10.0, 0.7, 0.4)).entries
    perm = [0, 2, 1]
    np.testing.assert_allclose(swapped, I[np.ix_(perm, perm)], rtol=1e-6)


def test_fisher_score_route_agrees(fisher_table):
    score = fisher_information(ModelParams(10.0, 0.4, 0.7), method="score").entries
    np.testing.assert_allclose(score, fisher_table.entries, rtol=1e-3)


def test_fisher_table2_values(fisher_table):
    got = [math.sqrt(mle_asymptotic_variance(fisher_table, m)[0]) for m in (100, 200, 500)]
    assert [round(v, 2) for v in got] == [1.22, 0.86, 0.55]


def test_fisher_errors():
    with pytest.raises(DomainError):
        fisher_information(ModelParams(10.0, 1.0, 0.5))
    with pytest.raises(DomainError):
        fisher_information(ModelParams(10.0, 0.5, 0.5), tail_eps=0.1)


def test_cramer_rao_ordering():
    for lam, p1, p2 in itertools.product((1.0, 10.0, 40.0), (0.1, 0.5, 0.9), (0.2, 0.7)):
        p = ModelParams(lam, p1, p2)
        v_ml = mle_asymptotic_variance(fisher_information(p, tail_eps=1e-10), 100)[0]
        assert v_ml <= moment_asymptotic_variance(p, 100)[0]


def test_confidence_intervals(fisher_table):
    est = solve_mle(sample_counts(ModelParams(10.0, 0.4, 0.7), 100, seed=3))
    at_truth = mle_confidence_intervals(est, fisher_table, 100, 0.05)
    lo, hi = at_truth.ci["lambda"]
    assert (hi - lo) / 2 == pytest.approx(1.959964 * 1.22, rel=0.01)
    one_sigma = mle_confidence_intervals(est, fisher_table, 100, 0.32)
    assert normal_quantile(0.84) == pytest.approx(0.9945, abs=1e-4)
    lo, hi = one_sigma.ci["lambda"]
    assert (hi - lo) / 2 == pytest.approx(math.sqrt(mle_asymptotic_variance(fisher_table, 100)[0]), rel=0.01)
    assert one_sigma.solver["iterations"] == est.solver_iterations


def test_singular_fisher_inverse(fisher_table):
    from dualinspect.mle import FisherMatrix
    bad = FisherMatrix(np.zeros((3, 3)), fisher_table.params, (1, 1), 1.0)
    with pytest.raises(InvalidInputError):
        bad.inverse()
