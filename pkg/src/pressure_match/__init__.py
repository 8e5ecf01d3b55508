"""First-rank pressure in residency matching.

A single doctor ranks ``L`` programs. Each program accepts independently with
probability ``a``; each accepting program pressures the doctor to list it first
with probability ``e``; the clearinghouse may swap the first two entries of the
submitted list with probability ``epsilon``. The package computes the model's
statistics in closed form, checks them against exact enumeration and Monte
Carlo simulation, and calibrates ``(a, e)`` from observed match rates.
"""

__version__ = "0.1.0"

from .analytics import (
    KeyStatistics,
    conditional_match_rates,
    epsilon_for_alpha,
    p_first,
    p_later,
    permutation_rank_loss,
    quantile_loss,
    rank_loss,
    rank_loss_random,
    type1_error_lower_bound,
    type1_error_no_swap,
    type1_error_with_swap,
)
from .calibration import (
    AggregateCounts,
    MarketObservation,
    calibrate,
    key_statistics,
    rates_from_counts,
)
from .errors import (
    CapExceeded,
    DegenerateCondition,
    Infeasible,
    InvalidObservation,
    ParseError,
    PressureMatchError,
)
from .model import MatchOutcome, ModelParams, build_submitted_list, match, realized_rank_loss, swap_first_two
from .montecarlo import EstimateWithError, SimulationConfig, simulate, simulate_statistics
