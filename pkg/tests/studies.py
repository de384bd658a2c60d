"""Shared helpers for the test modules."""

import functools

from dualinspect.model import ModelParams
from dualinspect.report import Method
from dualinspect.simulation import StudyConfig, run_study

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = []


@functools.lru_cache(maxsize=None)
def cached_study(lam, p1, p2, m, reps, seed, methods):
    """Studies reused across test modules (the large ones take seconds)."""
    config = StudyConfig(ModelParams(lam, p1, p2), m, reps, seed,
                         tuple(Method(x) for x in methods))
    return run_study(config)
