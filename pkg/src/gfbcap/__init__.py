"""Capacity of stationary Gaussian noise channels with and without feedback.

Nonfeedback capacity by water-filling, the closed-form feedback capacity of
first-order ARMA noise, certificates and evaluators for stationary feedback
strategies, finite-block (Cover-Pombra) lower bounds, and the
Schalkwijk-Kailath-Butman coding scheme.  All rates are in nats.
"""

from .arma1 import Arma1Solution, feedback_capacity, solve_x0
from .cover_pombra import BlockResult, BlockStrategy, evaluate_block_rate, optimize
from .filters import CausalFilter
from .sk_coding import SchemeParams, exact_trace, pam_simulate, reference_sequence
from .spectrum import (
    Arma1Spectrum,
    ChannelSpecError,
    GridSpectrum,
    RationalSpectrum,
    autocovariance,
    log_integral,
    spectrum_from_dict,
)
from .variational import VariationalCandidate, eval_objective, maximin_rate, verify_sufficient_condition
from .waterfilling import capacity_nofb

__version__ = "0.1.0"

__all__ = [
    "Arma1Solution",
    "Arma1Spectrum",
    "BlockResult",
    "BlockStrategy",
    "CausalFilter",
    "ChannelSpecError",
    "GridSpectrum",
    "RationalSpectrum",
    "SchemeParams",
    "VariationalCandidate",
    "autocovariance",
    "capacity_nofb",
    "eval_objective",
    "evaluate_block_rate",
    "exact_trace",
    "feedback_capacity",
    "log_integral",
    "maximin_rate",
    "optimize",
    "pam_simulate",
    "reference_sequence",
    "solve_x0",
    "spectrum_from_dict",
    "verify_sufficient_condition",
]
