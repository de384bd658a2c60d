"""Seeded Monte Carlo studies and reproduction of the reference tables.

Replicate ``i`` of a study with seed ``s`` simulates its items from
``derive(s, i)`` exactly as ``sample_full(params, m, derive(s, i))`` would.
Replicates are processed in fixed-size chunks; with ``threads > 1`` chunks go
to worker processes and are reassembled in replicate order, so reports do
not depend on the worker count.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import rng
from .capture_recapture import batch_cr
from .errors import EstimationError
from .mle import LikelihoodContext, fisher_information, mle_asymptotic_variance, solve_mle
from .model import ModelParams, draw_latent
from .moment import batch_moment, moment_asymptotic_expectation, moment_asymptotic_variance
from .report import Method

__all__ = ["StudyConfig", "EstimatorSummary", "StudyReport", "run_study",
           "std_ratio_curve", "Table", "reproduce_tables", "TABLE_PARAMS", "TABLE_MS",
           "FIGURE2_P1", "figure2_p2_grid"]

TABLE_PARAMS = ModelParams(10.0, 0.4, 0.7)
TABLE_MS = (100, 200, 500)
DEFAULT_REPLICATES = {"T1": 100_000, "T2": 5000, "T3": 5000}
FIGURE2_P1 = (0.2, 0.5, 0.8)

# Items simulated per chunk; fixed so that chunking never depends on threads.
_CHUNK_ITEMS = 1 << 17

_MOMENT_FAILURES = {1: "undefined_estimator", 2: "covariance_nonpositive"}


def figure2_p2_grid() -> list:
    return [round(0.05 * k, 2) for k in range(1, 20)]


@dataclass(frozen=True)
class StudyConfig:
    params: ModelParams
    m: int
    replicates: int
    seed: int = 0
    methods: tuple = (Method.MOMENT,)

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("m must be at least 2")
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        rng.check_seed(self.seed)
        methods = tuple(Method(mt) for mt in self.methods)
        if not methods:
            raise ValueError("at least one method is required")
        object.__setattr__(self, "methods", methods)

    def to_dict(self) -> dict:
        return {"lambda": self.params.lam, "p1": self.params.p1, "p2": self.params.p2,
                "m": self.m, "replicates": self.replicates, "seed": self.seed,
                "methods": [mt.value for mt in self.methods]}


@dataclass(frozen=True)
class EstimatorSummary:
    """Moments of one estimator over the replicates where it succeeded."""

    method: Method
    successes: int
    failures: dict
    mean: dict
    std: dict
    bias: dict

    def to_dict(self) -> dict:
        return {"successes": self.successes, "failures": dict(self.failures),
                "mean": self.mean, "std": self.std, "bias": self.bias}


@dataclass(frozen=True, eq=False)
class StudyReport:
    """Aggregated study results.

    ``values[method]`` is a ``(replicates, 3)`` array of per-replicate
    ``(lam, p1, p2)`` estimates with NaN rows for failures; it is kept for
    further analysis but left out of :meth:`to_dict`.
    """

    config: StudyConfig
    summaries: dict
    ml_better_fraction: Optional[float]
    ml_better_count: int
    head_to_head_n: int
    values: dict = field(repr=False, default_factory=dict)

    @property
    def replicates(self) -> int:
        return self.config.replicates

    def to_dict(self) -> dict:
        out = {"config": self.config.to_dict(), "replicates": self.replicates,
               "estimators": {mt.value: s.to_dict() for mt, s in self.summaries.items()}}
        if Method.MLE in self.summaries and Method.MOMENT in self.summaries:
            out["head_to_head"] = {"ml_better_fraction": self.ml_better_fraction,
                                   "ml_better": self.ml_better_count,
                                   "compared": self.head_to_head_n}
        return out


def _chunk_bounds(config: StudyConfig) -> list:
    per = max(1, _CHUNK_ITEMS // config.m)
    return [(lo, min(lo + per, config.replicates)) for lo in range(0, config.replicates, per)]


def _run_chunk(config: StudyConfig, lo: int, hi: int) -> dict:
    rep_seeds = rng.derive(config.seed, np.arange(lo, hi))
    item_seeds = rng.derive(rep_seeds[:, None], np.arange(config.m)[None, :])
    x1, x2, y = draw_latent(config.params, item_seeds)
    r1, r2 = x1 + y, x2 + y
    out = {}
    if Method.MOMENT in config.methods:
        lam, p1, p2, status = batch_moment(r1, r2)
        out[Method.MOMENT] = (np.stack([lam, p1, p2], axis=1),
                              [_MOMENT_FAILURES.get(int(s)) for s in status])
    if Method.CAPTURE_RECAPTURE in config.methods:
        lam, p1, p2, status, _ = batch_cr(x1, x2, y)
        out[Method.CAPTURE_RECAPTURE] = (np.stack([lam, p1, p2], axis=1),
                                         ["undefined_estimator" if s else None for s in status])
    if Method.MLE in config.methods:
        vals = np.full((hi - lo, 3), np.nan)
        kinds = [None] * (hi - lo)
        for i in range(hi - lo):
            try:
                est = solve_mle(LikelihoodContext(r1[i], r2[i]))
            except EstimationError as exc:
                kinds[i] = exc.kind
                continue
            vals[i] = (est.lambda_star, est.p1_star, est.p2_star)
        out[Method.MLE] = (vals, kinds)
    return out


def _run_chunk_args(args):
    return _run_chunk(*args)


def _summarize(method: Method, values: np.ndarray, kinds: list, truth: ModelParams):
    ok = np.array([k is None for k in kinds], dtype=bool)
    failures = {}
    for k in kinds:
        if k is not None:
            failures[k] = failures.get(k, 0) + 1
    good = values[ok]
    n = len(good)
    mean, std, bias = {}, {}, {}
    for j, (name, true) in enumerate(zip(("lambda", "p1", "p2"), truth.as_tuple())):
        if n == 0:
            mean[name] = std[name] = bias[name] = None
            continue
        col = np.ascontiguousarray(good[:, j])
        mu = float(np.mean(col))
        mean[name] = mu
        std[name] = float(np.std(col, ddof=1)) if n > 1 else 0.0
        bias[name] = mu - true
    return EstimatorSummary(method, n, dict(sorted(failures.items())), mean, std, bias)


def run_study(config: StudyConfig, threads: int = 1) -> StudyReport:
    """Simulate ``config.replicates`` data sets and apply each requested estimator.

    Estimator failures are counted by kind and excluded from that estimator's
    moments. The ML-better fraction counts replicates where both the moment and
    ML estimates exist and ``|lam* - lam| < |lam_hat - lam|``.
    """
    bounds = _chunk_bounds(config)
    if threads > 1 and len(bounds) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_run_chunk_args, [(config, lo, hi) for lo, hi in bounds]))
    else:
        parts = [_run_chunk(config, lo, hi) for lo, hi in bounds]

    values, summaries = {}, {}
    for method in config.methods:
        vals = np.concatenate([p[method][0] for p in parts], axis=0)
        kinds = [k for p in parts for k in p[method][1]]
        values[method] = vals
        summaries[method] = _summarize(method, vals, kinds, config.params)

    fraction, better, compared = None, 0, 0
    if Method.MOMENT in values and Method.MLE in values:
        mom = values[Method.MOMENT][:, 0]
        ml = values[Method.MLE][:, 0]
        both = ~np.isnan(mom) & ~np.isnan(ml)
        compared = int(both.sum())
        lam = config.params.lam
        better = int(np.sum(np.abs(ml[both] - lam) < np.abs(mom[both] - lam)))
        fraction = better / compared if compared else None
    return StudyReport(config, summaries, fraction, better, compared, values)


def std_ratio_curve(lam: float, p1: float, p2_grid: Sequence[float],
                    tail_eps: float = 1e-10) -> list:
    """Asymptotic ratio of ML to moment standard deviation of the lambda estimate.

    Both standard deviations shrink like ``1/sqrt(M)``, so the ratio compares
    the prefactors ``sqrt([I^-1]_11)`` and ``sqrt(M * Var lam_hat)``.
    """
    out = []
    for p2 in p2_grid:
        params = ModelParams(lam, p1, p2)
        fisher = fisher_information(params, tail_eps)
        v_ml = float(fisher.inverse()[0, 0])
        v_mom = moment_asymptotic_variance(params, 1)[0]
        out.append((float(p2), math.sqrt(v_ml / v_mom)))
    return out


@dataclass(frozen=True)
class Table:
    name: str
    title: str
    columns: tuple
    rows: list
    replicates: int
    seed: int
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"table": self.name, "title": self.title, "replicates": self.replicates,
                "seed": self.seed, "columns": list(self.columns),
                "rows": [dict(zip(self.columns, r)) for r in self.rows],
                **({"extras": self.extras} if self.extras else {})}

    def format(self) -> str:
        def cell(v):
            if v is None:
                return "-"
            if isinstance(v, float):
                return f"{v:.2f}" if abs(v) < 1e6 else f"{v:.3g}"
            return str(v)

        body = [[cell(v) for v in r] for r in self.rows]
        widths = [max(len(c), *(len(r[i]) for r in body)) for i, c in enumerate(self.columns)]
        lines = [self.title,
                 "  ".join(c.rjust(w) for c, w in zip(self.columns, widths)),
                 "  ".join("-" * w for w in widths)]
        lines += ["  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in body]
        for key, val in self.extras.items():
            lines.append(f"{key}: {val}")
        return "\n".join(lines)


def reproduce_tables(which: str, replicates_override: Optional[int] = None, seed: int = 0,
                     threads: int = 1) -> Table:
    """Re-run one of the three reference studies at lambda=10, p1=0.4, p2=0.7.

    ``T1``: moment estimator, simulated vs. first-order mean and std.
    ``T2``: ML estimator std, simulated vs. Fisher approximation.
    ``T3``: moment vs. ML means, stds and the share of replicates where ML is closer.
    """
    which = which.upper()
    if which not in DEFAULT_REPLICATES:
        raise ValueError(f"unknown table {which!r}; expected T1, T2 or T3")
    reps = replicates_override or DEFAULT_REPLICATES[which]
    params = TABLE_PARAMS
    rows, extras = [], {}
    if which == "T1":
        columns = ("M", "E(sim.)", "E(app.)", "Std(sim.)", "Std(app.)")
        title = "Moment estimator of lambda (lambda=10, p1=0.4, p2=0.7)"
        for m in TABLE_MS:
            rep = run_study(StudyConfig(params, m, reps, seed, (Method.MOMENT,)), threads)
            s = rep.summaries[Method.MOMENT]
            e_app = moment_asymptotic_expectation(params, m)[0]
            sd_app = math.sqrt(moment_asymptotic_variance(params, m)[0])
            rows.append((m, s.mean["lambda"], e_app, s.std["lambda"], sd_app))
            if s.failures:
                extras[f"failures M={m}"] = s.failures
    elif which == "T2":
        columns = ("M", "Std(sim.)", "Std(app.)")
        title = "ML estimator of lambda (lambda=10, p1=0.4, p2=0.7)"
        fisher = fisher_information(params)
        for m in TABLE_MS:
            rep = run_study(StudyConfig(params, m, reps, seed, (Method.MLE,)), threads)
            s = rep.summaries[Method.MLE]
            rows.append((m, s.std["lambda"], math.sqrt(mle_asymptotic_variance(fisher, m)[0])))
            if s.failures:
                extras[f"failures M={m}"] = s.failures
    else:
        columns = ("M", "mean moment", "mean ML", "std moment", "std ML", "% ML better")
        title = "Moment vs. ML estimator of lambda (lambda=10, p1=0.4, p2=0.7)"
        for m in TABLE_MS:
            rep = run_study(StudyConfig(params, m, reps, seed, (Method.MOMENT, Method.MLE)),
                            threads)
            mo, ml = rep.summaries[Method.MOMENT], rep.summaries[Method.MLE]
            pct = None if rep.ml_better_fraction is None else 100.0 * rep.ml_better_fraction
            rows.append((m, mo.mean["lambda"], ml.mean["lambda"], mo.std["lambda"],
                         ml.std["lambda"], pct))
            for label, s in (("moment", mo), ("ML", ml)):
                if s.failures:
                    extras[f"{label} failures M={m}"] = s.failures
    return Table(which, title, columns, rows, reps, seed, extras)
