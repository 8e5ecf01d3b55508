"""Closed-form statistics of the pressure model."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

from .errors import Infeasible, InvalidParams
from .model import ModelParams


@dataclass(frozen=True)
class KeyStatistics:
    """One row of the headline table for a calibrated market.

    ``prl_alpha`` is ``None`` when ``alpha`` cannot be reached with a swap
    probability of at most one half.
    """

    a: float
    e: float
    rank_loss: float
    random_rank_loss: float
    q_lower: float
    prl_alpha: Optional[float]
    quantile_loss: float
    alpha: float

    @property
    def feasible(self) -> bool:
        return self.prl_alpha is not None


def p_first(params: ModelParams) -> float:
    """Probability of matching the first listed program.

    Either some accepting program pressures (it is then listed first and
    matches) or nobody pressures and program 1 accepts.
    """
    a, e, L = params.a, params.e, params.L
    return 1.0 - (1.0 - a * e) ** (L - 1) * (1.0 - a)


def p_later(params: ModelParams) -> float:
    """Common conditional match rate at ranks 2..L."""
    a, e = params.a, params.e
    return (a - a * e) / (1.0 - a * e)


def conditional_match_rates(params: ModelParams) -> List[float]:
    later = p_later(params)
    return [p_first(params)] + [later] * (params.L - 1)


def rank_loss(params: ModelParams) -> float:
    """Expected rank loss caused by pressure.

    Conditions on the best accepting program ``i`` (which must not pressure
    for a loss to occur); each of the ``L - i`` worse programs pressures
    independently with probability ``a*e`` and the first of them to do so,
    ``d`` places further down, costs ``d`` ranks.
    """
    a, e, L = params.a, params.e, params.L
    ae = a * e
    total = 0.0
    for best in range(1, L):
        p_best = (1.0 - a) ** (best - 1) * a
        shift = sum(d * (1.0 - ae) ** (d - 1) * ae for d in range(1, L - best + 1))
        total += p_best * (1.0 - e) * shift
    return total


def expected_best_rank(a: float, L: int) -> float:
    """E[min accepting program | at least one accepts]."""
    mass = sum(i * (1.0 - a) ** (i - 1) for i in range(1, L + 1))
    return a * mass / (1.0 - (1.0 - a) ** L)


def rank_loss_random(params: ModelParams) -> float:
    """Rank loss of matching a uniformly random accepting program instead of the best."""
    a, L = params.a, params.L
    return (1.0 - (1.0 - a) ** L) * ((L + 1) / 2.0 - expected_best_rank(a, L))


def _check_rank(params: ModelParams, k: int) -> None:
    if not 1 <= k <= params.L:
        raise InvalidParams(f"rank k={k} out of range 1..{params.L}")


def type1_error_no_swap(params: ModelParams, k: int) -> float:
    """Probability that a compliant doctor who lists the pressuring program
    k-th is still not matched to it, without the swap."""
    _check_rank(params, k)
    if k == 1:
        return 0.0
    a, e, L = params.a, params.e, params.L
    return 1.0 - (1.0 - a) ** (k - 1) * (1.0 - a * e) ** (L - k)


def type1_error_lower_bound(params: ModelParams) -> float:
    """Smallest type-I error over ranks k >= 2 (attained at k = 2)."""
    a, e, L = params.a, params.e, params.L
    return 1.0 - (1.0 - a) * (1.0 - a * e) ** (L - 2)


def type1_error_with_swap(params: ModelParams, k: int) -> float:
    _check_rank(params, k)
    eps = params.epsilon
    if k > 2:
        return type1_error_no_swap(params, k)
    other = 2 if k == 1 else 1
    return eps * type1_error_no_swap(params, other) + (1.0 - eps) * type1_error_no_swap(params, k)


def permutation_rank_loss(a: float, epsilon: float) -> float:
    """Expected rank loss of the swap applied to a truthful list.

    Only costs a rank when programs 1 and 2 both accept.
    """
    if not 0.0 < a < 1.0:
        raise InvalidParams(f"a must lie in (0, 1), got {a!r}")
    if not 0.0 <= epsilon <= 0.5:
        raise InvalidParams(f"epsilon must lie in [0, 1/2], got {epsilon!r}")
    return a * a * epsilon


def epsilon_for_alpha(a: float, alpha: float) -> float:
    """Swap probability whose first-position type-I error equals ``alpha``.

    Raises :class:`Infeasible` when ``alpha > a/2``.
    """
    if not 0.0 < a < 1.0:
        raise InvalidParams(f"a must lie in (0, 1), got {a!r}")
    if not alpha > 0.0:
        raise InvalidParams(f"alpha must be positive, got {alpha!r}")
    if alpha > a / 2.0:
        raise Infeasible(alpha, a)
    return min(alpha / a, 0.5)


def permutation_rank_loss_for_alpha(a: float, alpha: float) -> float:
    return permutation_rank_loss(a, epsilon_for_alpha(a, alpha))


def quantile_loss(rl: float, L: int) -> float:
    if rl < 0:
        raise InvalidParams(f"rank loss must be non-negative, got {rl!r}")
    if L < 2:
        raise InvalidParams(f"L must be >= 2, got {L!r}")
    return rl / (L + 1)


def key_statistics_for(params: ModelParams, alpha: float) -> KeyStatistics:
    """Headline statistics for already-known ``(a, e, L)``."""
    rl = rank_loss(params)
    try:
        prl = permutation_rank_loss_for_alpha(params.a, alpha)
    except Infeasible:
        prl = None
    return KeyStatistics(
        a=params.a,
        e=params.e,
        rank_loss=rl,
        random_rank_loss=rank_loss_random(params),
        q_lower=type1_error_lower_bound(params),
        prl_alpha=prl,
        quantile_loss=quantile_loss(rl, params.L),
        alpha=alpha,
    )
