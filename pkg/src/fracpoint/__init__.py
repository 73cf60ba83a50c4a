"""Series, transform and Monte-Carlo tools for state-dependent fractional counting processes."""

from .adm import FracPoly, adm_partial_sum, adm_stage, rl_derivative, rl_integral
from .compositions import IndexFamily, Kind, count, enumerate_family
from .errors import (
    DomainError,
    FracPointError,
    NegativeExponent,
    NonConvergence,
    OrdersExhausted,
    QuadratureFailure,
)
from .params import DEFAULT_POLICY, EvalResult, OrderSequence, Process, TruncationPolicy
from .processes import (
    conv_ml_density_general,
    conv_ml_density_unit,
    fpbp_pmf,
    sdfpbp_pmf,
    sdlbp_pmf,
    sdtfpp1_pmf,
    sdtfpp2_pmf,
    tfpp_pmf,
)
from .specfun import log_gamma, ml_eval, recip_gamma
from .transforms import LTClosedForm, forward_lt, lt_eval, talbot_invert

__all__ = [
    "DEFAULT_POLICY",
    "DomainError",
    "EvalResult",
    "FracPointError",
    "FracPoly",
    "IndexFamily",
    "Kind",
    "LTClosedForm",
    "NegativeExponent",
    "NonConvergence",
    "OrderSequence",
    "OrdersExhausted",
    "Process",
    "QuadratureFailure",
    "TruncationPolicy",
    "adm_partial_sum",
    "adm_stage",
    "conv_ml_density_general",
    "conv_ml_density_unit",
    "count",
    "enumerate_family",
    "forward_lt",
    "fpbp_pmf",
    "log_gamma",
    "lt_eval",
    "ml_eval",
    "recip_gamma",
    "rl_derivative",
    "rl_integral",
    "sdfpbp_pmf",
    "sdlbp_pmf",
    "sdtfpp1_pmf",
    "sdtfpp2_pmf",
    "talbot_invert",
    "tfpp_pmf",
]
