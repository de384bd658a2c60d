"""Defect-rate estimation from two imperfect inspectors without joint-detection data."""

__version__ = "0.1.0"

from .capture_recapture import (cr_asymptotic_expectation, cr_asymptotic_variance,
                                cr_confidence_intervals, estimate_cr)
from .errors import (CovarianceNonPositiveError, DomainError, EstimationError,
                     InvalidInputError, NoInteriorMaximumError, SampleSizeError,
                     TruncationError, UndefinedEstimatorError)
from .mle import (FisherMatrix, LikelihoodContext, MleEstimate, MleOptions, fisher_information,
                  log_likelihood, mle_asymptotic_variance, mle_confidence_intervals,
                  mle_scalar_residual, psi, psi_prime, score_equations, solve_mle)
from .model import (CountPair, CountSample, FullCountSample, LatentTriple, ModelParams,
                    log_pmf, pmf, pmf_oracle, sample_counts, sample_full)
from .moment import (MomentEstimate, SummaryStats, estimate_moment,
                     moment_asymptotic_expectation, moment_asymptotic_variance,
                     moment_confidence_intervals, summarize)
from .report import EstimateReport, Method
from .simulation import StudyConfig, StudyReport, reproduce_tables, run_study, std_ratio_curve
from .special import normal_quantile
