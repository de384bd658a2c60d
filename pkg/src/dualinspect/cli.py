"""Command-line interface.

Exit codes: 0 success, 1 input or configuration error, 2 the estimator has no
value for these data (zero means, nonpositive covariance, or a likelihood
maximum on the boundary).
"""

import json
import logging
import sys

import click

from . import __version__
from .capture_recapture import cr_confidence_intervals, estimate_cr
from .csvio import CsvFormatError, read_pairs, read_triples
from .errors import (CovarianceNonPositiveError, EstimationError, NoInteriorMaximumError,
                     UndefinedEstimatorError)
from .mle import fisher_information, mle_confidence_intervals, solve_mle
from .model import ModelParams
from .moment import estimate_moment, moment_confidence_intervals
from .report import PARAMETERS, EstimateReport, Method
from .simulation import (FIGURE2_P1, StudyConfig, figure2_p2_grid, reproduce_tables,
                         run_study, std_ratio_curve)

log = logging.getLogger("dualinspect")

EXIT_OK, EXIT_INPUT, EXIT_PATHOLOGY = 0, 1, 2

_EXPLAIN = {
    UndefinedEstimatorError: "no defects were detected by one inspector, so its "
                             "detection rate cannot be separated from the defect rate",
    CovarianceNonPositiveError: "the counts of the two inspectors are not positively "
                                "correlated; the model implies positive correlation, "
                                "so more items are needed",
    NoInteriorMaximumError: "the likelihood is largest on the boundary of the parameter "
                            "space (typically a detection probability of 1); this occurs "
                            "when a detection probability is near 0 or 1 and few items "
                            "were inspected",
}


def _emit(text: str, output):
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        click.echo(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)


def _error(fmt: str, kind: str, message: str, code: int, rows=None) -> int:
    if fmt == "json":
        err = {"kind": kind, "message": message, "exit_code": code}
        if rows:
            err["rows"] = [[n, msg] for n, msg in rows]
        click.echo(_dump({"error": err}))
    click.echo(f"error: {message}", err=True)
    return code


def _format_report(rep: EstimateReport) -> str:
    lines = [f"method: {rep.method.value}   M = {rep.m}   alpha = {rep.alpha:g}"]
    head = f"{'parameter':<10}{'estimate':>14}{'std.err':>14}{'ci.low':>14}{'ci.high':>14}"
    lines += [head, "-" * len(head)]
    for name in PARAMETERS:
        est = rep.estimates[name]
        if rep.standard_errors is None:
            se = lo = hi = "-"
        else:
            se = f"{rep.standard_errors[name]:.6g}"
            lo, hi = (f"{v:.6g}" for v in rep.ci[name])
        lines.append(f"{name:<10}{est:>14.6g}{se:>14}{lo:>14}{hi:>14}")
    if rep.flags:
        lines.append("flags: " + ", ".join(rep.flags))
    if rep.solver:
        res = ", ".join(f"{r:.3g}" for r in rep.solver["residuals"])
        lines.append(f"solver: {rep.solver['iterations']} iterations, residuals [{res}]")
    if rep.note:
        lines.append(f"note: {rep.note}")
    return "\n".join(lines)


def _moment_report(sample, alpha) -> EstimateReport:
    est = estimate_moment(sample)
    if est.validity:
        flags = tuple(sorted(v.value for v in est.validity))
        estimates = {"lambda": est.lambda_hat, "p1": est.p1_hat, "p2": est.p2_hat}
        return EstimateReport(Method.MOMENT, sample.m, alpha, estimates, flags=flags)
    return moment_confidence_intervals(est, alpha)


def _mle_report(sample, alpha) -> EstimateReport:
    est = solve_mle(sample)
    fisher = fisher_information(est.as_params())
    return mle_confidence_intervals(est, fisher, sample.m, alpha)


@click.group()
@click.version_option(__version__, prog_name="dualinspect")
def cli():
    """Estimate defect and detection rates from two inspectors' defect counts."""


@cli.command()
@click.option("--input", "input_path", required=True,
              help="CSV with header r1,r2 (moment, mle) or x1,x2,y (cr).")
@click.option("--method", type=click.Choice(["moment", "mle", "cr"]), default="moment",
              show_default=True)
@click.option("--alpha", type=float, default=0.05, show_default=True,
              help="Intervals have confidence level 1 - alpha.")
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="json",
              show_default=True)
@click.option("--output", default=None, help="Write the report here instead of stdout.")
def estimate(input_path, method, alpha, fmt, output):
    """Estimate lambda, p1 and p2 from a CSV of per-item counts."""
    if not 0.0 < alpha < 1.0:
        return _error(fmt, "input_error", f"alpha must lie in (0, 1), got {alpha}", EXIT_INPUT)
    try:
        sample = read_triples(input_path) if method == "cr" else read_pairs(input_path)
    except CsvFormatError as exc:
        return _error(fmt, "input_error", f"{input_path}: {exc}", EXIT_INPUT, exc.errors)
    except (OSError, ValueError) as exc:
        return _error(fmt, "input_error", f"{input_path}: {exc}", EXIT_INPUT)
    try:
        if method == "moment":
            rep = _moment_report(sample, alpha)
        elif method == "mle":
            rep = _mle_report(sample, alpha)
        else:
            rep = cr_confidence_intervals(estimate_cr(sample), alpha)
    except EstimationError as exc:
        why = _EXPLAIN.get(type(exc), "")
        return _error(fmt, exc.kind, f"{exc}" + (f" ({why})" if why else ""), EXIT_PATHOLOGY)
    _emit(_dump(rep.to_dict()) if fmt == "json" else _format_report(rep), output)
    return EXIT_OK


def _parse_methods(text: str) -> tuple:
    try:
        return tuple(Method(t.strip().lower()) for t in text.split(",") if t.strip())
    except ValueError:
        raise click.BadParameter(f"methods must be drawn from moment, mle, cr; got {text!r}")


def _format_study(rep) -> str:
    c = rep.config
    lines = [f"lambda={c.params.lam:g} p1={c.params.p1:g} p2={c.params.p2:g} "
             f"M={c.m} replicates={c.replicates} seed={c.seed}"]
    head = f"{'method':<8}{'ok':>8}{'mean':>10}{'std':>10}{'bias':>10}  failures"
    lines += [head, "-" * (len(head) + 2)]
    for mt, s in rep.summaries.items():
        def f(v):
            return "-" if v is None else f"{v:.4f}"
        fails = ", ".join(f"{k}={v}" for k, v in s.failures.items()) or "none"
        lines.append(f"{mt.value:<8}{s.successes:>8}{f(s.mean['lambda']):>10}"
                     f"{f(s.std['lambda']):>10}{f(s.bias['lambda']):>10}  {fails}")
    if rep.ml_better_fraction is not None:
        lines.append(f"ML closer to lambda in {100 * rep.ml_better_fraction:.1f}% of "
                     f"{rep.head_to_head_n} replicates where both succeeded")
    return "\n".join(lines)


@cli.command()
@click.option("--lambda", "lam", type=float, required=True)
@click.option("--p1", type=float, required=True)
@click.option("--p2", type=float, required=True)
@click.option("--m", type=int, required=True, help="Items per data set.")
@click.option("--reps", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--methods", default="moment,mle", show_default=True)
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="json",
              show_default=True)
@click.option("--output", default=None)
def simulate(lam, p1, p2, m, reps, seed, methods, threads, fmt, output):
    """Run a seeded Monte Carlo study."""
    try:
        config = StudyConfig(ModelParams(lam, p1, p2), m, reps, seed, _parse_methods(methods))
    except (ValueError, click.BadParameter) as exc:
        return _error(fmt, "input_error", str(exc), EXIT_INPUT)
    log.info("simulate: seed=%d replicates=%d", seed, reps)
    rep = run_study(config, threads=max(1, threads))
    _emit(_dump(rep.to_dict()) if fmt == "json" else _format_study(rep), output)
    return EXIT_OK


@cli.command()
@click.argument("which", type=click.Choice(["t1", "t2", "t3"], case_sensitive=False))
@click.option("--reps", type=int, default=None,
              help="Replicates per row (default: 100000 for t1, 5000 otherwise).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table",
              show_default=True)
@click.option("--output", default=None)
def tables(which, reps, seed, threads, fmt, output):
    """Reproduce a reference table (simulated next to approximate columns)."""
    if reps is not None and reps < 1:
        return _error(fmt, "input_error", "--reps must be positive", EXIT_INPUT)
    log.info("tables %s: seed=%d", which, seed)
    table = reproduce_tables(which, reps, seed, threads=max(1, threads))
    _emit(_dump(table.to_dict()) if fmt == "json" else table.format(), output)
    return EXIT_OK


def _float_list(text: str) -> list:
    return [float(t) for t in text.split(",") if t.strip()]


def _p2_grid(text: str) -> list:
    """``a,b,c`` or ``start:stop:step`` (inclusive of stop)."""
    if ":" in text:
        start, stop, step = (float(t) for t in text.split(":"))
        if step <= 0:
            raise ValueError("step must be positive")
        n = int(round((stop - start) / step))
        return [round(start + k * step, 12) for k in range(n + 1)]
    return _float_list(text)


@cli.command()
@click.option("--lambda", "lam", type=float, default=10.0, show_default=True)
@click.option("--p1", "p1_list", default=",".join(str(p) for p in FIGURE2_P1), show_default=True,
              help="Comma-separated p1 values.")
@click.option("--p2", "p2_spec", default="0.05:0.95:0.05", show_default=True,
              help="Comma-separated p2 values or start:stop:step.")
@click.option("--tail-eps", type=float, default=1e-10, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv"]), default="csv", show_default=True)
@click.option("--output", default=None, help="CSV path (default: stdout).")
def ratio(lam, p1_list, p2_spec, tail_eps, fmt, output):
    """Asymptotic std ratio of the ML to the moment estimator of lambda, as CSV."""
    try:
        p1s = _float_list(p1_list)
        p2s = _p2_grid(p2_spec)
        rows = []
        for p1 in p1s:
            for p2, value in std_ratio_curve(lam, p1, p2s, tail_eps):
                rows.append(f"{p1!r},{p2!r},{lam!r},{value!r}")
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_INPUT
    text = "\n".join(["p1,p2,lambda,ratio"] + rows)
    try:
        _emit(text, output)
    except OSError as exc:
        click.echo(f"error: cannot write {output}: {exc}", err=True)
        return EXIT_INPUT
    return EXIT_OK


def main(argv=None) -> int:
    """Run the CLI and return its exit code (usage errors map to 1)."""
    try:
        rv = cli.main(args=argv, prog_name="dualinspect", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return EXIT_INPUT
    except click.Abort:
        click.echo("aborted", err=True)
        return EXIT_INPUT
    return rv if isinstance(rv, int) else EXIT_OK


def run():
    logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s", stream=sys.stderr)
    sys.exit(main())


if __name__ == "__main__":
    run()
