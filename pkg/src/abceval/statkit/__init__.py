"""Self-contained statistical kernel: agreement, bootstrap, regression,
hypothesis tests, intervals, power, and stepwise selection."""

from .distributions import normal_cdf, normal_ppf, t_cdf, t_ppf, f_cdf, f_ppf
from .agreement import DegenerateAgreementError, ReliabilityData, krippendorff_alpha
from .bootstrap import BootstrapFailureError, bootstrap_bca
from .hypothesis import TestResult, cohens_d, sign_test, t_test, two_prop_z_test
from .intervals import IntervalEstimate, student_t_interval, wilson_interval
from .power import power_f_test, power_t_test
from .regression import (
    RankDeficientError,
    RegressionFit,
    SeparationError,
    logistic_fit,
    ols_fit,
)
from .stepwise import StepwiseStep, StepwiseTrace, beam_backward_selection

__all__ = [
    "BootstrapFailureError",
    "DegenerateAgreementError",
    "IntervalEstimate",
    "RankDeficientError",
    "RegressionFit",
    "ReliabilityData",
    "SeparationError",
    "StepwiseStep",
    "StepwiseTrace",
    "TestResult",
    "beam_backward_selection",
    "bootstrap_bca",
    "cohens_d",
    "f_cdf",
    "f_ppf",
    "krippendorff_alpha",
    "logistic_fit",
    "normal_cdf",
    "normal_ppf",
    "ols_fit",
    "power_f_test",
    "power_t_test",
    "sign_test",
    "student_t_interval",
    "t_cdf",
    "t_ppf",
    "t_test",
    "two_prop_z_test",
]
