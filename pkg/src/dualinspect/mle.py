"""Maximum-likelihood estimation through a one-dimensional equation in lambda.

Writing ``q = (1 - p1)(1 - p2)`` the mean log-likelihood is::

    LL = -lam (1 - q) + rbar1 ln(lam p1 (1 - p2)) + rbar2 ln(lam p2 (1 - p1))
         - mean(ln r1! + ln r2!) + psi(q lam)

    psi(z) = mean_m ln sum_l C(r1, l) C(r2, l) l! z^-l

The stationarity conditions force ``p_i = rbar_i / lam``, leaving a scalar
equation ``g(lam) = 0`` that is solved by bracketing and Brent's method.
Asymptotic variances come from a numerically evaluated Fisher matrix.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg, optimize, stats

from .errors import (DomainError, InvalidInputError, NoInteriorMaximumError,
                     TruncationError, UndefinedEstimatorError)
from .model import CountSample, ModelParams
from .moment import batch_summary
from .report import EstimateReport, Method, normal_intervals
from .special import log_factorial, logsumexp

__all__ = [
    "LikelihoodContext", "MleOptions", "MleEstimate", "FisherMatrix",
    "psi", "psi_prime", "log_likelihood", "score_equations", "mle_scalar_residual",
    "solve_mle", "fisher_information", "mle_asymptotic_variance",
    "mle_standard_errors", "mle_confidence_intervals",
]


class LikelihoodContext:
    """Per-sample data needed by the likelihood, built once and shared.

    Items with equal ``(r1, r2)`` share one row of log coefficients
    ``ln[C(r1, l) C(r2, l) l!]``; ``weights`` holds each row's share of the
    items. ``item_row[i]`` maps item ``i`` to its row.
    """

    def __init__(self, r1, r2):
        r1 = np.asarray(r1, dtype=np.int64)
        r2 = np.asarray(r2, dtype=np.int64)
        if r1.ndim != 1 or r1.shape != r2.shape or r1.size == 0:
            raise ValueError("r1 and r2 must be equal-length, non-empty 1-d arrays")
        if np.any(r1 < 0) or np.any(r2 < 0):
            raise DomainError("counts must be nonnegative")
        self.m = int(r1.size)
        self.r1 = r1
        self.r2 = r2
        pairs, self.item_row, counts = np.unique(
            np.stack([r1, r2], axis=1), axis=0, return_inverse=True, return_counts=True)
        self.item_row = self.item_row.reshape(-1)
        self.pairs = pairs
        self.weights = counts / self.m
        u1, u2 = pairs[:, 0], pairs[:, 1]
        lmax = int(np.minimum(u1, u2).max())
        self.l = np.arange(lmax + 1, dtype=np.float64)
        li = np.arange(lmax + 1)
        a = u1[:, None] - li
        b = u2[:, None] - li
        valid = (a >= 0) & (b >= 0)
        a = np.where(valid, a, 0)
        b = np.where(valid, b, 0)
        logc = (log_factorial(u1)[:, None] + log_factorial(u2)[:, None]
                - log_factorial(a) - log_factorial(b) - log_factorial(li))
        self.log_coef = np.where(valid, logc, -np.inf)
        self.r_bar_1 = float(r1.sum() / self.m)
        self.r_bar_2 = float(r2.sum() / self.m)
        self.s12 = float("nan")
        if self.m > 1:
            self.s12 = float(batch_summary(r1[None, :], r2[None, :])[2][0])
        self.log_fact_const = float(np.mean(log_factorial(r1) + log_factorial(r2)))

    @classmethod
    def from_sample(cls, sample: CountSample) -> "LikelihoodContext":
        return cls(sample.r1, sample.r2)

    @classmethod
    def from_pairs(cls, pairs) -> "LikelihoodContext":
        pairs = list(pairs)
        return cls([p[0] for p in pairs], [p[1] for p in pairs])

    def coefficients(self, item: int) -> np.ndarray:
        """Log coefficients of item ``item`` for ``l = 0..min(r1, r2)``."""
        row = self.log_coef[self.item_row[item]]
        return row[: int(min(self.r1[item], self.r2[item])) + 1]

    def _log_terms(self, z: float) -> np.ndarray:
        if not z > 0:
            raise DomainError(f"psi needs z > 0, got {z}")
        return self.log_coef - self.l * math.log(z)


def psi(z: float, ctx: LikelihoodContext) -> float:
    """``mean_m ln sum_l c_{m,l} z^-l``."""
    return float(np.dot(ctx.weights, logsumexp(ctx._log_terms(z), axis=1)))


def _mean_joint(z: float, ctx: LikelihoodContext) -> float:
    """``-z psi'(z)``: the item average of ``E[l]`` under weights ``c_l z^-l``."""
    t = ctx._log_terms(z)
    w = np.exp(t - t.max(axis=1, keepdims=True))
    mean_l = (w @ ctx.l) / w.sum(axis=1)
    return float(np.dot(ctx.weights, mean_l))


def psi_prime(z: float, ctx: LikelihoodContext) -> float:
    """Derivative of :func:`psi`.

    Each item contributes ``-E[l] / z`` with ``l`` weighted by
    ``c_l z^-l``, which is evaluated with the row maximum factored out.
    """
    return -_mean_joint(z, ctx) / z


def _require_interior(params: ModelParams):
    if not params.is_interior():
        raise DomainError("log-likelihood needs 0 < p1, p2 < 1")


def log_likelihood(params: ModelParams, ctx: LikelihoodContext) -> float:
    """Mean log-likelihood per item."""
    _require_interior(params)
    lam, p1, p2 = params.as_tuple()
    q = (1.0 - p1) * (1.0 - p2)
    return (-lam * (1.0 - q)
            + ctx.r_bar_1 * math.log(lam * p1 * (1.0 - p2))
            + ctx.r_bar_2 * math.log(lam * p2 * (1.0 - p1))
            - ctx.log_fact_const
            + psi(q * lam, ctx))


def score_equations(params: ModelParams, ctx: LikelihoodContext):
    """Partial derivatives of the mean log-likelihood in ``(lam, p1, p2)``."""
    _require_interior(params)
    lam, p1, p2 = params.as_tuple()
    r1, r2 = ctx.r_bar_1, ctx.r_bar_2
    q = (1.0 - p1) * (1.0 - p2)
    dpsi = psi_prime(q * lam, ctx)
    d_lam = -(1.0 - q) + r1 / lam + r2 / lam + q * dpsi
    d_p1 = -lam * (1.0 - p2) + r1 / p1 - r2 / (1.0 - p1) - (1.0 - p2) * lam * dpsi
    d_p2 = -lam * (1.0 - p1) - r1 / (1.0 - p2) + r2 / p2 - (1.0 - p1) * lam * dpsi
    return d_lam, d_p1, d_p2


def _lower_bound(ctx: LikelihoodContext) -> float:
    return max(ctx.r_bar_1, ctx.r_bar_2)


def mle_scalar_residual(lam: float, ctx: LikelihoodContext) -> float:
    """``g(lam) = -(lam/rbar1 - 1)(lam/rbar2 - 1) psi'(z) - 1`` with
    ``z = (1 - rbar1/lam)(1 - rbar2/lam) lam``.

    Multiplying out gives ``lam * S(z) / (rbar1 rbar2) - 1`` with
    ``S(z) = -z psi'(z)``, which is what is evaluated: it avoids the
    cancellation between the two small factors near ``lam = max(rbar)``.
    On the curve ``p_i = rbar_i / lam`` the derivative of the log-likelihood
    along lam is ``-p1 p2 g(lam)``, so maxima are upward zero crossings.
    """
    r1, r2 = ctx.r_bar_1, ctx.r_bar_2
    if r1 <= 0 or r2 <= 0:
        raise DomainError("residual undefined when a mean count is zero")
    if not lam > max(r1, r2):
        raise DomainError(f"need lam > max(rbar1, rbar2) = {max(r1, r2)}, got {lam}")
    z = (lam - r1) * (lam - r2) / lam
    return lam * _mean_joint(z, ctx) / (r1 * r2) - 1.0


@dataclass(frozen=True)
class MleOptions:
    """Root-finder settings.

    Attributes:
        rtol: relative tolerance on lambda handed to Brent's method.
        max_doublings: bracket-expansion steps in each direction.
        maxiter: Brent iteration cap.
        lower_margin: relative offset of the lower search bound above
            ``max(rbar1, rbar2)``.
    """

    rtol: float = 1e-12
    max_doublings: int = 60
    maxiter: int = 200
    lower_margin: float = 1e-9


@dataclass(frozen=True)
class MleEstimate:
    lambda_star: float
    p1_star: float
    p2_star: float
    residuals: tuple
    solver_iterations: int
    bracket: tuple = ()
    m: int = 0

    def as_params(self) -> ModelParams:
        return ModelParams(self.lambda_star, self.p1_star, self.p2_star)


def _start_point(ctx: LikelihoodContext, lower: float) -> float:
    r1, r2, s12 = ctx.r_bar_1, ctx.r_bar_2, ctx.s12
    if s12 > 0:
        lam_hat = r1 * r2 / s12
        if lam_hat > lower:
            return lam_hat
    return 2.0 * _lower_bound(ctx)


def _find_bracket(g, lower: float, start: float, max_steps: int):
    """Locate ``a < b`` with ``g(a) < 0 < g(b)``; returns ``(a, b, evaluations)``.

    From ``start`` the search moves up by doubling when ``g(start) < 0`` and
    halves the gap to ``lower`` when ``g(start) > 0``.
    """
    g0 = g(start)
    evals = 1
    if g0 == 0.0:
        return start, start, evals
    if g0 < 0.0:
        prev = start
        for k in range(1, max_steps + 1):
            hi = start * 2.0 ** k
            evals += 1
            if g(hi) > 0.0:
                return prev, hi, evals
            prev = hi
        raise NoInteriorMaximumError(
            "no interior maximum: the likelihood equation has no root above "
            f"max(rbar1, rbar2); scanned [{start:.6g}, {prev:.6g}]", bracket=(start, prev))
    prev = start
    gap = start - lower
    for k in range(1, max_steps + 1):
        lo = lower + gap * 2.0 ** -k
        evals += 1
        if g(lo) < 0.0:
            return lo, prev, evals
        prev = lo
    raise NoInteriorMaximumError(
        "no interior maximum: the likelihood increases toward the boundary "
        f"lam = max(rbar1, rbar2); scanned [{prev:.6g}, {start:.6g}]", bracket=(prev, start))


def solve_mle(sample, options: Optional[MleOptions] = None) -> MleEstimate:
    """Maximum-likelihood estimates of ``(lam, p1, p2)``.

    Args:
        sample: a :class:`CountSample` or a prepared :class:`LikelihoodContext`.
        options: solver settings.

    Raises:
        UndefinedEstimatorError: a mean count is zero.
        NoInteriorMaximumError: no sign change of ``g`` was found, meaning the
            likelihood peaks on the boundary of the parameter space.
    """
    options = options or MleOptions()
    if isinstance(sample, LikelihoodContext):
        ctx = sample
        if ctx.m < 2:
            raise ValueError("need at least 2 items")
    else:
        ctx = LikelihoodContext.from_sample(sample)
    r1, r2 = ctx.r_bar_1, ctx.r_bar_2
    if r1 == 0 or r2 == 0:
        raise UndefinedEstimatorError(
            "undefined estimator: " + ("r̄₁=0" if r1 == 0 else "r̄₂=0"))
    lower = _lower_bound(ctx) * (1.0 + options.lower_margin)

    def g(lam):
        return mle_scalar_residual(lam, ctx)

    start = _start_point(ctx, lower)
    a, b, evals = _find_bracket(g, lower, start, options.max_doublings)
    if a == b:
        lam_star, iterations = a, 0
    else:
        lam_star, info = optimize.brentq(g, a, b, xtol=1e-300, rtol=options.rtol,
                                         maxiter=options.maxiter, full_output=True)
        iterations = info.iterations
    p1, p2 = r1 / lam_star, r2 / lam_star
    residuals = score_equations(ModelParams(lam_star, p1, p2), ctx)
    return MleEstimate(lam_star, p1, p2, tuple(float(v) for v in residuals),
                       iterations, (a, b), ctx.m)


@dataclass(frozen=True, eq=False)
class FisherMatrix:
    """Per-item Fisher information in the order ``(lam, p1, p2)``."""

    entries: np.ndarray
    params: ModelParams
    truncation_r_max: tuple
    captured_mass: float
    method: str = "hessian"

    def inverse(self) -> np.ndarray:
        try:
            c = linalg.cho_factor(self.entries)
        except linalg.LinAlgError as exc:
            raise InvalidInputError("Fisher matrix is not positive definite") from exc
        return linalg.cho_solve(c, np.eye(3))


class _GridLogPmf:
    """``ln P(r1, r2)`` over a fixed rectangular grid at varying interior parameters.

    Everything that depends only on the counts is computed once.
    """

    def __init__(self, r1_max: int, r2_max: int):
        r1, r2 = np.meshgrid(np.arange(r1_max + 1), np.arange(r2_max + 1), indexing="ij")
        self.r1, self.r2 = r1, r2
        lmax = min(r1_max, r2_max)
        l = np.arange(lmax + 1)
        a = r1[..., None] - l
        b = r2[..., None] - l
        valid = (a >= 0) & (b >= 0)
        self.a = np.where(valid, a, 0).astype(np.float64)
        self.b = np.where(valid, b, 0).astype(np.float64)
        self.l = l.astype(np.float64)
        base = -(log_factorial(np.where(valid, a, 0)) + log_factorial(np.where(valid, b, 0))
                 + log_factorial(l))
        self.base = np.where(valid, base, -np.inf)

    def __call__(self, lam: float, p1: float, p2: float) -> np.ndarray:
        t1 = lam * p1 * (1.0 - p2)
        t2 = lam * p2 * (1.0 - p1)
        t12 = lam * (p1 * p2)
        terms = self.base + self.l * math.log(t12) + self.a * math.log(t1) + self.b * math.log(t2)
        return logsumexp(terms, axis=-1) - (t12 + (t1 + t2))


def _fd_steps(params: ModelParams) -> np.ndarray:
    hp = [min(1e-4, 0.1 * min(p, 1.0 - p)) for p in (params.p1, params.p2)]
    return np.array([1e-4 * params.lam, hp[0], hp[1]])


def _hessian_fd(f, x: np.ndarray, h: np.ndarray, f0: np.ndarray):
    """Central-difference Hessian of a vector-valued ``f`` (one matrix per grid point)."""
    n = len(x)
    H = [[None] * n for _ in range(n)]
    e = np.eye(n)
    for i in range(n):
        fp = f(*(x + h[i] * e[i]))
        fm = f(*(x - h[i] * e[i]))
        H[i][i] = (fp - 2.0 * f0 + fm) / (h[i] * h[i])
        for j in range(i + 1, n):
            fpp = f(*(x + h[i] * e[i] + h[j] * e[j]))
            fpm = f(*(x + h[i] * e[i] - h[j] * e[j]))
            fmp = f(*(x - h[i] * e[i] + h[j] * e[j]))
            fmm = f(*(x - h[i] * e[i] - h[j] * e[j]))
            H[i][j] = H[j][i] = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j])
    return H


def _gradient_fd(f, x: np.ndarray, h: np.ndarray):
    e = np.eye(len(x))
    return [(f(*(x + h[i] * e[i])) - f(*(x - h[i] * e[i]))) / (2.0 * h[i]) for i in range(len(x))]


def _richardson(coarse, fine):
    """One Richardson level for an O(h^2) rule evaluated at ``h`` and ``h/2``."""
    if isinstance(coarse, list):
        return [_richardson(c, f) for c, f in zip(coarse, fine)]
    return (4.0 * fine - coarse) / 3.0


def _expect(prob: np.ndarray, values: np.ndarray) -> float:
    return math.fsum((prob * values).ravel())


def fisher_information(params: ModelParams, tail_eps: float = 1e-12,
                       method: str = "hessian", buffer: int = 10) -> FisherMatrix:
    """Fisher information of one item, by finite differences over a truncated grid.

    ``method="hessian"`` averages minus the Hessian of ``ln P``; ``"score"``
    averages the outer product of the score. Both use central differences
    with one Richardson refinement. The grid runs to the ``1 - tail_eps``
    quantile of each ``R_i ~ Poisson(lam p_i)`` plus ``buffer``.

    Raises:
        DomainError: boundary detection probabilities or a bad ``tail_eps``.
        TruncationError: the grid holds less than ``1 - 100 * tail_eps`` of the mass.
    """
    if not params.is_interior():
        raise DomainError("Fisher information needs 0 < p1, p2 < 1")
    if not 0.0 < tail_eps <= 1e-6:
        raise DomainError("tail_eps must lie in (0, 1e-6]")
    if method not in ("hessian", "score"):
        raise ValueError(f"unknown method {method!r}")
    r_max = tuple(int(stats.poisson.isf(tail_eps, params.lam * p)) + buffer
                  for p in (params.p1, params.p2))
    f = _GridLogPmf(*r_max)
    x = np.array(params.as_tuple())
    f0 = f(*x)
    prob = np.exp(f0)
    captured = math.fsum(prob.ravel())
    if captured < 1.0 - 100.0 * tail_eps:
        raise TruncationError(f"grid captured only {captured!r} of the probability mass")
    h = _fd_steps(params)
    I = np.empty((3, 3))
    if method == "hessian":
        H = _richardson(_hessian_fd(f, x, h, f0), _hessian_fd(f, x, h / 2.0, f0))
        for i in range(3):
            for j in range(3):
                I[i, j] = -_expect(prob, H[i][j])
    else:
        s = _richardson(_gradient_fd(f, x, h), _gradient_fd(f, x, h / 2.0))
        for i in range(3):
            for j in range(3):
                I[i, j] = _expect(prob, s[i] * s[j])
    I = 0.5 * (I + I.T)
    return FisherMatrix(I, params, r_max, captured, method)


def mle_asymptotic_variance(fisher: FisherMatrix, m: int):
    """``diag(I^-1) / m`` in the order ``(lam, p1, p2)``."""
    if m < 2:
        raise ValueError("m must be at least 2")
    d = np.diag(fisher.inverse()) / m
    return float(d[0]), float(d[1]), float(d[2])


def mle_standard_errors(fisher: FisherMatrix, m: int) -> dict:
    v = mle_asymptotic_variance(fisher, m)
    return {"lambda": math.sqrt(v[0]), "p1": math.sqrt(v[1]), "p2": math.sqrt(v[2])}


def mle_confidence_intervals(est: MleEstimate, fisher: FisherMatrix, m: int,
                             alpha: float = 0.05) -> EstimateReport:
    """Intervals ``estimate +/- z * sqrt([I^-1]_ii / m)``; ``fisher`` should be
    evaluated at the estimate."""
    ses = mle_standard_errors(fisher, m)
    estimates = {"lambda": est.lambda_star, "p1": est.p1_star, "p2": est.p2_star}
    solver = {"iterations": est.solver_iterations, "residuals": list(est.residuals)}
    return normal_intervals(Method.MLE, m, alpha, estimates, ses, solver=solver)
