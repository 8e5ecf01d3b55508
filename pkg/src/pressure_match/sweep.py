"""One-parameter sweeps of the model statistics, as plot-ready rows."""
from __future__ import annotations

from typing import Dict, List, Optional, Tuple

import numpy as np

from . import analytics
from .calibration import MarketObservation, calibrate
from .errors import Infeasible, InvalidParams
from .model import ModelParams

PARAMETERS = ("e", "epsilon", "P2", "alpha")

COLUMNS = {
    "e": ("e", "a", "L", "P1", "P2", "P1_minus_P2", "RL", "Q_lower", "QL"),
    "epsilon": ("epsilon", "a", "e", "L", "PRL", "Q1_swap", "Q2_swap", "Q1_swap_no_pressure"),
    "P2": ("P2", "P1", "L", "a", "e", "RL", "RL_rand", "Q_lower", "PRL_alpha", "QL", "alpha"),
    "alpha": ("alpha", "a", "feasible", "epsilon", "PRL_alpha"),
}

REQUIRED = {
    "e": ("a", "L"),
    "epsilon": ("a", "e", "L"),
    "P2": ("P1", "L", "alpha"),
    "alpha": ("a",),
}


def grid(start: float, stop: float, steps: int) -> List[float]:
    if steps < 2:
        raise InvalidParams(f"a sweep needs at least 2 steps, got {steps}")
    if not start < stop:
        raise InvalidParams(f"sweep range must satisfy start < stop, got {start} .. {stop}")
    return [float(x) for x in np.linspace(start, stop, steps)]


def _row_e(value: float, fixed: Dict) -> Dict:
    p = ModelParams(int(fixed["L"]), fixed["a"], value)
    p1, p2 = analytics.p_first(p), analytics.p_later(p)
    rl = analytics.rank_loss(p)
    return {
        "e": value, "a": p.a, "L": p.L, "P1": p1, "P2": p2, "P1_minus_P2": p1 - p2,
        "RL": rl, "Q_lower": analytics.type1_error_lower_bound(p),
        "QL": analytics.quantile_loss(rl, p.L),
    }


def _row_epsilon(value: float, fixed: Dict) -> Dict:
    p = ModelParams(int(fixed["L"]), fixed["a"], fixed["e"], value)
    return {
        "epsilon": value, "a": p.a, "e": p.e, "L": p.L,
        "PRL": analytics.permutation_rank_loss(p.a, value),
        "Q1_swap": analytics.type1_error_with_swap(p, 1),
        "Q2_swap": analytics.type1_error_with_swap(p, 2),
        "Q1_swap_no_pressure": analytics.type1_error_with_swap(p.replace(e=0.0), 1),
    }


def _row_p2(value: float, fixed: Dict) -> Dict:
    obs = MarketObservation(fixed["P1"], value, int(fixed["L"]))
    a, e = calibrate(obs)
    stats = analytics.key_statistics_for(ModelParams(obs.L, a, e), fixed["alpha"])
    return {
        "P2": value, "P1": obs.P1, "L": obs.L, "a": a, "e": e,
        "RL": stats.rank_loss, "RL_rand": stats.random_rank_loss, "Q_lower": stats.q_lower,
        "PRL_alpha": stats.prl_alpha, "QL": stats.quantile_loss, "alpha": fixed["alpha"],
    }


def _row_alpha(value: float, fixed: Dict) -> Dict:
    a = fixed["a"]
    try:
        eps: Optional[float] = analytics.epsilon_for_alpha(a, value)
    except Infeasible:
        eps = None
    return {
        "alpha": value, "a": a, "feasible": eps is not None, "epsilon": eps,
        "PRL_alpha": None if eps is None else analytics.permutation_rank_loss(a, eps),
    }


_ROWS = {"e": _row_e, "epsilon": _row_epsilon, "P2": _row_p2, "alpha": _row_alpha}


def sweep(parameter: str, start: float, stop: float, steps: int, fixed: Dict) -> Tuple[Tuple[str, ...], List[Dict]]:
    """Evaluate the statistics relevant to ``parameter`` over an even grid.

    ``fixed`` supplies the other inputs (see ``REQUIRED``). Returns the column
    names and one dict per grid point.
    """
    if parameter not in PARAMETERS:
        raise InvalidParams(f"unknown sweep parameter {parameter!r}; choose from {', '.join(PARAMETERS)}")
    missing = [k for k in REQUIRED[parameter] if fixed.get(k) is None]
    if missing:
        raise InvalidParams(f"sweeping {parameter} needs fixed value(s) for {', '.join(missing)}")
    values = grid(start, stop, steps)
    return COLUMNS[parameter], [_ROWS[parameter](v, fixed) for v in values]
