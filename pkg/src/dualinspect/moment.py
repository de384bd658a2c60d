"""Moment-type estimators of the defect rate and detection probabilities.

Since ``E R_i = lam * p_i`` and ``Cov(R1, R2) = Var(Y) = lam * p1 * p2``::

    p1_hat = s12 / rbar2,   p2_hat = s12 / rbar1,   lam_hat = rbar1 * rbar2 / s12

with ``s12`` the unbiased sample cross-covariance.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (CovarianceNonPositiveError, DomainError, InvalidInputError,
                     UndefinedEstimatorError)
from .model import CountSample, ModelParams
from .report import EstimateReport, Method, normal_intervals

__all__ = [
    "Validity", "SummaryStats", "MomentEstimate", "summarize", "estimate_moment",
    "moment_asymptotic_expectation", "moment_asymptotic_variance",
    "moment_standard_errors", "moment_confidence_intervals", "batch_summary",
    "batch_moment",
]


class Validity(str, enum.Enum):
    P1_OUT_OF_RANGE = "P1_OUT_OF_RANGE"
    P2_OUT_OF_RANGE = "P2_OUT_OF_RANGE"


@dataclass(frozen=True)
class SummaryStats:
    r_bar_1: float
    r_bar_2: float
    s12: float
    m: int


@dataclass(frozen=True)
class MomentEstimate:
    lambda_hat: float
    p1_hat: float
    p2_hat: float
    stats: SummaryStats
    validity: frozenset = frozenset()

    def as_params(self) -> ModelParams:
        return ModelParams(self.lambda_hat, self.p1_hat, self.p2_hat)


def batch_summary(r1: np.ndarray, r2: np.ndarray):
    """Row-wise means and two-pass ``(m - 1)``-divisor covariance.

    ``r1``, ``r2`` have shape ``(replicates, m)``.
    """
    r1 = np.asarray(r1, dtype=np.float64)
    r2 = np.asarray(r2, dtype=np.float64)
    m = r1.shape[-1]
    rbar1 = r1.sum(axis=-1) / m
    rbar2 = r2.sum(axis=-1) / m
    dev = (r1 - rbar1[..., None]) * (r2 - rbar2[..., None])
    s12 = dev.sum(axis=-1) / (m - 1)
    return rbar1, rbar2, s12


def batch_moment(r1: np.ndarray, r2: np.ndarray):
    """Vectorized estimator over replicate rows.

    Returns ``(lam, p1, p2, status)`` where failed rows hold NaN and
    ``status`` is 0 on success, 1 for a zero mean, 2 for ``s12 <= 0``.
    """
    rbar1, rbar2, s12 = batch_summary(r1, r2)
    status = np.zeros(rbar1.shape, dtype=np.int8)
    status[s12 <= 0] = 2
    status[(rbar1 == 0) | (rbar2 == 0)] = 1
    ok = status == 0
    lam = np.full(rbar1.shape, np.nan)
    p1 = np.full(rbar1.shape, np.nan)
    p2 = np.full(rbar1.shape, np.nan)
    lam[ok] = rbar1[ok] * rbar2[ok] / s12[ok]
    p1[ok] = s12[ok] / rbar2[ok]
    p2[ok] = s12[ok] / rbar1[ok]
    return lam, p1, p2, status


def summarize(sample: CountSample) -> SummaryStats:
    rbar1, rbar2, s12 = batch_summary(sample.r1[None, :], sample.r2[None, :])
    return SummaryStats(float(rbar1[0]), float(rbar2[0]), float(s12[0]), sample.m)


def estimate_moment(sample: CountSample) -> MomentEstimate:
    """Moment estimates from observed pairs.

    Estimates of ``p_i`` above 1 are returned as computed and flagged.

    Raises:
        UndefinedEstimatorError: a mean count is zero.
        CovarianceNonPositiveError: ``s12 <= 0``, so ``lam_hat`` is not positive.
    """
    st = summarize(sample)
    if st.r_bar_1 == 0 or st.r_bar_2 == 0:
        which = "r̄₁=0" if st.r_bar_1 == 0 else "r̄₂=0"
        if st.r_bar_1 == 0 and st.r_bar_2 == 0:
            which = "r̄₁=0 and r̄₂=0"
        raise UndefinedEstimatorError(f"undefined estimator: {which}")
    if st.s12 <= 0:
        raise CovarianceNonPositiveError(
            f"sample covariance s12={st.s12:.6g} is not positive; the data are "
            "inconsistent with positively correlated counts at this sample size")
    lam, p1, p2, _ = batch_moment(sample.r1[None, :], sample.r2[None, :])
    flags = set()
    if not 0.0 <= p1[0] <= 1.0:
        flags.add(Validity.P1_OUT_OF_RANGE)
    if not 0.0 <= p2[0] <= 1.0:
        flags.add(Validity.P2_OUT_OF_RANGE)
    return MomentEstimate(float(lam[0]), float(p1[0]), float(p2[0]), st, frozenset(flags))


def _check_positive_ps(params: ModelParams):
    if params.p1 == 0 or params.p2 == 0:
        raise DomainError("detection probabilities must be positive")


def moment_asymptotic_expectation(params: ModelParams, m: int):
    """First-order expectations ``(E lam_hat, E p1_hat, E p2_hat)``."""
    _check_positive_ps(params)
    lam, p1, p2 = params.as_tuple()
    bias = ((lam + 1.0) * (1.0 + 1.0 / (p1 * p2)) - 1.0 / p1 - 1.0 / p2) / m
    return lam + bias, p1, p2


def _variances(lam: float, p1: float, p2: float, m: int):
    pp = p1 * p2
    v_lam = lam * (lam * (1.0 / pp + 1.0) + (1.0 / p1 - 1.0) * (1.0 / p2 - 1.0) + 1.0) / m
    v_p1 = p1 * p1 / pp * (1.0 + pp + (1.0 - p1) / lam) / m
    v_p2 = p2 * p2 / pp * (1.0 + pp + (1.0 - p2) / lam) / m
    return v_lam, v_p1, v_p2


def moment_asymptotic_variance(params: ModelParams, m: int):
    """First-order variances ``(Var lam_hat, Var p1_hat, Var p2_hat)``."""
    _check_positive_ps(params)
    return _variances(params.lam, params.p1, params.p2, m)


def moment_standard_errors(est: MomentEstimate) -> dict:
    """Plug-in standard errors; requires an unflagged estimate with ``p_i`` in (0, 1]."""
    if est.validity:
        raise InvalidInputError(
            "flagged estimate: " + ", ".join(sorted(v.value for v in est.validity)))
    if not (est.lambda_hat > 0 and 0 < est.p1_hat <= 1 and 0 < est.p2_hat <= 1):
        raise InvalidInputError("estimate outside the region where standard errors exist")
    v = _variances(est.lambda_hat, est.p1_hat, est.p2_hat, est.stats.m)
    return {"lambda": math.sqrt(v[0]), "p1": math.sqrt(v[1]), "p2": math.sqrt(v[2])}


def moment_confidence_intervals(est: MomentEstimate, alpha: float = 0.05) -> EstimateReport:
    ses = moment_standard_errors(est)
    estimates = {"lambda": est.lambda_hat, "p1": est.p1_hat, "p2": est.p2_hat}
    return normal_intervals(Method.MOMENT, est.stats.m, alpha, estimates, ses)
