"""Estimate reports shared by all three estimators."""

import enum
from dataclasses import dataclass, field
from typing import Optional

from .special import normal_quantile

PARAMETERS = ("lambda", "p1", "p2")


class Method(str, enum.Enum):
    MOMENT = "moment"
    MLE = "mle"
    CAPTURE_RECAPTURE = "cr"


@dataclass(frozen=True)
class EstimateReport:
    """Point estimates with normal-approximation intervals.

    ``standard_errors`` and ``ci`` are ``None`` when no interval could be
    formed (a flagged moment estimate); the point estimates are still given.
    """

    method: Method
    m: int
    alpha: float
    estimates: dict
    standard_errors: Optional[dict] = None
    ci: Optional[dict] = None
    flags: tuple = ()
    solver: Optional[dict] = None
    note: Optional[str] = None

    @property
    def z(self) -> float:
        return normal_quantile(1.0 - self.alpha / 2.0)

    def to_dict(self) -> dict:
        out = {
            "method": self.method.value,
            "m": self.m,
            "alpha": self.alpha,
            "estimates": dict(self.estimates),
            "standard_errors": None if self.standard_errors is None else dict(self.standard_errors),
            "ci": None if self.ci is None else {k: list(v) for k, v in self.ci.items()},
            "flags": list(self.flags),
        }
        if self.solver is not None:
            out["solver"] = dict(self.solver)
        if self.note is not None:
            out["note"] = self.note
        return out


def normal_intervals(method: Method, m: int, alpha: float, estimates: dict, ses: dict,
                     **extra) -> EstimateReport:
    """Build a report with ``estimate +/- z * se`` for every parameter."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    z = normal_quantile(1.0 - alpha / 2.0)
    ci = {}
    for name in PARAMETERS:
        half = z * ses[name]
        ci[name] = (estimates[name] - half, estimates[name] + half)
    return EstimateReport(method=method, m=m, alpha=alpha, estimates=dict(estimates),
                          standard_errors=dict(ses), ci=ci, **extra)
