"""Capture-recapture baseline for when joint detections are recorded.

With the mean counts ``xbar1`` (only inspector 1), ``xbar2`` (only inspector 2)
and ``ybar`` (both)::

    p1 = ybar / (xbar2 + ybar),  p2 = ybar / (xbar1 + ybar),
    lam = (xbar1 + ybar)(xbar2 + ybar) / ybar

Only the three means enter, so the per-item split carries no extra
information.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UndefinedEstimatorError
from .model import FullCountSample, ModelParams
from .report import EstimateReport, Method, normal_intervals

__all__ = ["CrEstimate", "estimate_cr", "batch_cr", "cr_asymptotic_expectation",
           "cr_asymptotic_variance", "cr_confidence_intervals"]

PLUG_IN_NOTE = "plug-in asymptotic"


@dataclass(frozen=True)
class CrEstimate:
    lambda_hat: float
    p1_hat: float
    p2_hat: float
    x_bar_1: float
    x_bar_2: float
    y_bar: float
    m: int

    def as_params(self) -> ModelParams:
        return ModelParams(self.lambda_hat, self.p1_hat, self.p2_hat)


def batch_cr(x1, x2, y):
    """Row-wise estimator over arrays of shape ``(replicates, m)``.

    Returns ``(lam, p1, p2, status)``; status 1 marks ``ybar == 0``.
    """
    m = np.shape(y)[-1]
    xb1 = np.asarray(x1).sum(axis=-1) / m
    xb2 = np.asarray(x2).sum(axis=-1) / m
    yb = np.asarray(y).sum(axis=-1) / m
    status = (yb == 0).astype(np.int8)
    ok = status == 0
    n1 = xb1 + yb
    n2 = xb2 + yb
    lam = np.full(yb.shape, np.nan)
    p1 = np.full(yb.shape, np.nan)
    p2 = np.full(yb.shape, np.nan)
    lam[ok] = n1[ok] * n2[ok] / yb[ok]
    p1[ok] = yb[ok] / n2[ok]
    p2[ok] = yb[ok] / n1[ok]
    return lam, p1, p2, status, (xb1, xb2, yb)


def estimate_cr(sample: FullCountSample) -> CrEstimate:
    """Capture-recapture estimates.

    Raises:
        UndefinedEstimatorError: no joint detections (``ybar == 0``).
    """
    lam, p1, p2, status, (xb1, xb2, yb) = batch_cr(
        sample.x1[None, :], sample.x2[None, :], sample.y[None, :])
    if status[0]:
        raise UndefinedEstimatorError("undefined estimator: ȳ=0 (no joint detections)")
    return CrEstimate(float(lam[0]), float(p1[0]), float(p2[0]),
                      float(xb1[0]), float(xb2[0]), float(yb[0]), sample.m)


def _check(params: ModelParams):
    if params.p1 == 0 or params.p2 == 0:
        raise DomainError("detection probabilities must be positive")


def cr_asymptotic_expectation(params: ModelParams, m: int):
    _check(params)
    lam, p1, p2 = params.as_tuple()
    return lam + (1.0 / p1 - 1.0) * (1.0 / p2 - 1.0) / m, p1, p2


def _variances(lam, p1, p2, m):
    pp = p1 * p2
    v_lam = lam * (1.0 + (1.0 / p1 - 1.0) * (1.0 / p2 - 1.0)) / m
    v_p1 = p1 * p1 * (1.0 - p1) / (lam * pp * m)
    v_p2 = p2 * p2 * (1.0 - p2) / (lam * pp * m)
    return v_lam, v_p1, v_p2


def cr_asymptotic_variance(params: ModelParams, m: int):
    _check(params)
    return _variances(params.lam, params.p1, params.p2, m)


def cr_confidence_intervals(est: CrEstimate, alpha: float = 0.05) -> EstimateReport:
    """Normal intervals from the asymptotic variances at the estimates."""
    v = _variances(est.lambda_hat, est.p1_hat, est.p2_hat, est.m)
    ses = {"lambda": math.sqrt(v[0]), "p1": math.sqrt(v[1]), "p2": math.sqrt(v[2])}
    estimates = {"lambda": est.lambda_hat, "p1": est.p1_hat, "p2": est.p2_hat}
    return normal_intervals(Method.CAPTURE_RECAPTURE, est.m, alpha, estimates, ses,
                            note=PLUG_IN_NOTE)
