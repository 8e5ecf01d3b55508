"""Observed match rates and the inversion from (P1, P2, L) to (a, e)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from . import analytics, oracle
from .analytics import KeyStatistics
from .errors import (
    Infeasible,
    InvalidObservation,
    InvalidParams,
    NegativeDenominator,
    ZeroDenominator,
)
from .model import ModelParams

ENGINES = ("analytic", "oracle", "montecarlo")

EXACT = "exact"
APPROXIMATE = "approximate"


@dataclass(frozen=True)
class AggregateCounts:
    """Published match counts for one market.

    ``unmatched_by_list_length[j]`` is the number of unmatched applicants whose
    list had ``j + 1`` entries. When it is missing only the approximate rate
    formula is available.
    """

    market: str
    applicants: int
    matched_by_rank: Tuple[int, ...]
    unmatched_by_list_length: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "matched_by_rank", tuple(self.matched_by_rank))
        if self.unmatched_by_list_length is not None:
            object.__setattr__(
                self, "unmatched_by_list_length", tuple(self.unmatched_by_list_length)
            )
        counts = [self.applicants, *self.matched_by_rank, *(self.unmatched_by_list_length or ())]
        if any(c < 0 for c in counts):
            raise InvalidObservation(f"{self.market}: counts must be non-negative")
        if sum(self.matched_by_rank) > self.applicants:
            raise InvalidObservation(
                f"{self.market}: {sum(self.matched_by_rank)} matched exceeds "
                f"{self.applicants} applicants"
            )


@dataclass(frozen=True)
class RateTable:
    market: str
    rates: Tuple[float, ...]
    formula: str


@dataclass(frozen=True)
class MarketObservation:
    P1: float
    P2: float
    L: int
    label: str = ""

    def __post_init__(self):
        if isinstance(self.L, bool) or int(self.L) != self.L or self.L < 2:
            raise InvalidObservation(f"{self.label or 'observation'}: L must be an integer >= 2")
        object.__setattr__(self, "L", int(self.L))
        if not (0.0 < self.P1 < 1.0 and 0.0 < self.P2 < 1.0):
            raise InvalidObservation(
                f"{self.label or 'observation'}: P1 and P2 must lie in (0, 1)"
            )
        if self.P1 <= self.P2:
            raise InvalidObservation(
                f"{self.label or 'observation'}: no first-rank premium observed "
                f"(P1={self.P1:g} <= P2={self.P2:g})"
            )


def rates_from_counts(counts: AggregateCounts) -> RateTable:
    """Conditional match rate at each listed rank.

    The at-risk population at rank ``k`` removes everyone matched at an earlier
    rank and, when the data has it, everyone unmatched whose list ended before
    ``k``.
    """
    unmatched = counts.unmatched_by_list_length
    rates = []
    removed = 0
    for k, matched in enumerate(counts.matched_by_rank, 1):
        at_risk = counts.applicants - removed
        if at_risk < 0:
            raise NegativeDenominator(k, at_risk, counts.market)
        if at_risk == 0:
            raise ZeroDenominator(k, counts.market)
        rates.append(matched / at_risk)
        removed += matched
        if unmatched is not None and k <= len(unmatched):
            removed += unmatched[k - 1]
    return RateTable(counts.market, tuple(rates), APPROXIMATE if unmatched is None else EXACT)


def calibrate(obs: MarketObservation) -> Tuple[float, float]:
    """Recover ``(a, e)`` from the first two conditional match rates and L.

    ``1 - P2 = (1 - a)/(1 - ae)`` and ``1 - P1 = (1 - ae)^L (1 - P2)`` give
    ``1 - ae`` as an L-th root, and ``a`` and ``e`` follow.
    """
    r = ((1.0 - obs.P1) / (1.0 - obs.P2)) ** (1.0 / obs.L)
    a = 1.0 - r * (1.0 - obs.P2)
    e = (1.0 - r) / a
    return a, e


def calibrated_params(obs: MarketObservation, epsilon: float = 0.0) -> ModelParams:
    a, e = calibrate(obs)
    return ModelParams(obs.L, a, e, epsilon)


def key_statistics(
    obs: MarketObservation,
    alpha: float,
    engine: str = "analytic",
    trials: int = 1_000_000,
    seed: int = 0,
    workers: int = 1,
) -> KeyStatistics:
    """Headline statistics for one market, computed by the chosen engine.

    The calibrated ``(a, e)`` always come from the closed-form inversion. An
    unreachable ``alpha`` leaves ``prl_alpha`` as ``None``.
    """
    if engine not in ENGINES:
        raise InvalidParams(f"unknown engine {engine!r}; choose from {', '.join(ENGINES)}")
    if not alpha > 0:
        raise InvalidParams(f"alpha must be positive, got {alpha!r}")
    params = calibrated_params(obs)
    try:
        eps = analytics.epsilon_for_alpha(params.a, alpha)
    except Infeasible:
        eps = None

    if engine == "analytic":
        return analytics.key_statistics_for(params, alpha)

    if engine == "oracle":
        rl = oracle.exact_rank_loss(params)
        rl_rand = oracle.exact_random_rank_loss(params)
        q_lower = oracle.exact_type1_error(params, 2)
        prl = None if eps is None else oracle.exact_permutation_rank_loss(params.replace(epsilon=eps))
    else:
        from .montecarlo import simulate

        sim = simulate(params.replace(epsilon=eps or 0.0), trials, seed=seed, workers=workers)
        rl = sim.rank_loss.mean
        rl_rand = sim.random_rank_loss.mean
        q_lower = sim.q_lower.mean
        prl = None if eps is None else sim.permutation_rank_loss.mean
    return KeyStatistics(
        a=params.a,
        e=params.e,
        rank_loss=rl,
        random_rank_loss=rl_rand,
        q_lower=q_lower,
        prl_alpha=prl,
        quantile_loss=analytics.quantile_loss(max(rl, 0.0), params.L),
        alpha=alpha,
    )


# provenance of each reported cell for a given engine
def provenance(engine: str) -> Dict[str, str]:
    cells = {"P1": "input", "P2": "input", "L": "input", "a": "calibration", "e": "calibration"}
    for name in ("RL", "RL_rand", "Q_lower", "PRL_alpha", "QL"):
        cells[name] = engine
    return cells
