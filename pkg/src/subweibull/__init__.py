"""
subweibull - moment, GBO-norm and tail bounds for weighted sums of sub-Weibull variables
"""

__version__ = "0.1.0"

from .bounds import (
    BoundValue,
    Regime,
    dual_moment_rate,
    gbo_bound_params,
    moment_rate,
    moment_rate_psi,
    tail_closed_form,
    tail_lower_K,
    tail_upper_K,
)
from .errors import ConfigError, DomainError, NumericalError, SubWeibullError
from .model import WeightedSumProblem, canonicalize
from .orlicz import (
    GBOFunction,
    orlicz_norm_analytic,
    orlicz_norm_sample,
    sequence_orlicz_norm,
    survival_Y,
    survival_Z,
)
from .sampling import sample_Y, sample_Z, sample_Zstar

__all__ = [
    "BoundValue",
    "Regime",
    "WeightedSumProblem",
    "canonicalize",
    "moment_rate",
    "moment_rate_psi",
    "gbo_bound_params",
    "tail_upper_K",
    "tail_lower_K",
    "tail_closed_form",
    "dual_moment_rate",
    "GBOFunction",
    "orlicz_norm_analytic",
    "orlicz_norm_sample",
    "sequence_orlicz_norm",
    "survival_Y",
    "survival_Z",
    "sample_Y",
    "sample_Z",
    "sample_Zstar",
    "SubWeibullError",
    "ConfigError",
    "DomainError",
    "NumericalError",
]
