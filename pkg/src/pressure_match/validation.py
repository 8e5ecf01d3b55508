"""Cross-engine agreement suite: closed forms vs enumeration vs simulation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np

from . import analytics, oracle
from .calibration import calibrated_params
from .errors import CapExceeded
from .ingest import bundled_observations
from .model import ModelParams
from .montecarlo import simulate

ABS_TOL = 1e-12
Z_LIMIT = 4.0
ALPHA = 0.15

# closed-form side of every cross-check; tests swap entries to prove the harness bites
ANALYTIC: Dict[str, Callable[[ModelParams], object]] = {
    "P_k": analytics.conditional_match_rates,
    "RL": analytics.rank_loss,
    "RL_rand": analytics.rank_loss_random,
    "Q_k": lambda p: [analytics.type1_error_with_swap(p, k) for k in range(1, p.L + 1)],
    "PRL": lambda p: analytics.permutation_rank_loss(p.a, p.epsilon),
}

EXACT: Dict[str, Callable[[ModelParams], object]] = {
    "P_k": oracle.exact_conditional_match_rates,
    "RL": oracle.exact_rank_loss,
    "RL_rand": oracle.exact_random_rank_loss,
    "Q_k": oracle.exact_type1_errors,
    "PRL": oracle.exact_permutation_rank_loss,
}


@dataclass
class Check:
    suite: str
    statistic: str
    worst: float
    limit: float
    where: str = ""
    measure: str = "|dev|"
    strict: bool = False

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.worst):
            return False
        return self.worst < self.limit if self.strict else self.worst <= self.limit

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        at = f" at {self.where}" if self.where else ""
        return (
            f"{status}  {self.suite:<20} {self.statistic:<9} worst {self.measure} = "
            f"{self.worst:.3e} (limit {self.limit:g}){at}"
        )


@dataclass
class ValidationReport:
    checks: List[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[Check]:
        return [c for c in self.checks if not c.passed]

    def summary(self) -> str:
        lines = [c.line() for c in self.checks]
        n_fail = len(self.failures)
        lines.append(
            f"{'PASSED' if self.passed else 'FAILED'}: {len(self.checks) - n_fail}/{len(self.checks)} checks"
        )
        return "\n".join(lines) + "\n"


def grid_values(density: int) -> List[float]:
    """``density`` evenly spaced values from 0.1 to 0.9."""
    if density < 1:
        raise ValueError("grid density must be >= 1")
    if density == 1:
        return [0.5]
    return [round(float(x), 12) for x in np.linspace(0.1, 0.9, density)]


def parameter_grid(
    max_L: int, density: int, epsilons: Sequence[float] = (0.0, 0.25, 0.5), min_L: int = 2
) -> Iterable[ModelParams]:
    values = grid_values(density)
    for L in range(min_L, max_L + 1):
        for a in values:
            for e in values:
                for eps in epsilons:
                    yield ModelParams(L, a, e, eps)


def _deviation(x, y) -> float:
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    ys = np.atleast_1d(np.asarray(y, dtype=float))
    if xs.shape != ys.shape:
        return math.inf
    return float(np.max(np.abs(xs - ys)))


def _label(p: ModelParams) -> str:
    return f"L={p.L} a={p.a:g} e={p.e:g} eps={p.epsilon:g}"


def check_analytic_vs_oracle(
    grid: Iterable[ModelParams],
    analytic: Optional[Mapping[str, Callable]] = None,
    tolerance: float = ABS_TOL,
) -> List[Check]:
    closed = dict(ANALYTIC)
    closed.update(analytic or {})
    checks = {name: Check("analytic-vs-oracle", name, 0.0, tolerance) for name in closed}
    for p in grid:
        for name, fn in closed.items():
            dev = _deviation(fn(p), EXACT[name](p))
            check = checks[name]
            if not dev <= check.worst:
                check.worst, check.where = dev, _label(p)
    return list(checks.values())


def check_oracle_structure(grid: Iterable[ModelParams], tolerance: float = ABS_TOL) -> List[Check]:
    """Normalisation of the enumeration and the shape of the match-rate profile."""
    norm = Check("oracle-structure", "weights", 0.0, tolerance)
    tail = Check("oracle-structure", "P_tail", 0.0, tolerance)
    # shortfall of P1 below P2 must stay strictly negative
    gap = Check("oracle-structure", "P1>P2", -math.inf, 0.0, measure="P2-P1", strict=True)
    seen = set()
    for p in grid:
        key = (p.L, p.a, p.e)
        if key in seen or p.e == 0.0:
            continue
        seen.add(key)
        dev = abs(oracle.total_weight(p) - 1.0)
        if dev > norm.worst:
            norm.worst, norm.where = dev, _label(p)
        rates = oracle.exact_conditional_match_rates(p)
        spread = max(rates[1:]) - min(rates[1:])
        if spread > tail.worst:
            tail.worst, tail.where = spread, _label(p)
        shortfall = rates[1] - rates[0]
        if shortfall > gap.worst:
            gap.worst, gap.where = shortfall, _label(p)
    return [norm, tail, gap]


def montecarlo_deviations(params: ModelParams, trials: int, seed: int, workers: int = 1) -> Dict[str, tuple]:
    """``statistic -> (estimate, exact, z)`` for the simulated headline statistics."""
    sim = simulate(params, trials, seed=seed, workers=workers)
    rates = oracle.exact_conditional_match_rates(params)
    plain = oracle.exact_type1_errors(params.replace(epsilon=0.0))
    swapped = oracle.exact_type1_errors(params)
    pairs = {
        "P1": (sim.match_rates[0], rates[0]),
        "P2": (sim.match_rates[1], rates[1]),
        "RL": (sim.rank_loss, oracle.exact_rank_loss(params)),
        "RL_rand": (sim.random_rank_loss, oracle.exact_random_rank_loss(params)),
        "PRL": (sim.permutation_rank_loss, oracle.exact_permutation_rank_loss(params)),
        "Q_lower": (sim.type1_no_swap[1], plain[1]),
        "Q1_swap": (sim.type1_with_swap[0], swapped[0]),
    }
    return {name: (est, exact, est.z_score(exact)) for name, (est, exact) in pairs.items()}


def calibrated_parameter_sets(alpha: float = ALPHA) -> List[ModelParams]:
    """The calibrated markets with the swap probability that attains ``alpha``."""
    out = []
    for obs in bundled_observations():
        p = calibrated_params(obs)
        out.append(p.replace(epsilon=analytics.epsilon_for_alpha(p.a, alpha)))
    return out


def check_montecarlo(
    param_sets: Sequence[ModelParams], trials: int, seed: int, z_limit: float = Z_LIMIT, workers: int = 1
) -> List[Check]:
    checks: Dict[str, Check] = {}
    for i, p in enumerate(param_sets):
        for name, (est, exact, z) in montecarlo_deviations(p, trials, seed + i, workers).items():
            check = checks.setdefault(name, Check("montecarlo-vs-oracle", name, 0.0, z_limit, measure="|z|"))
            if not abs(z) <= check.worst:
                check.worst, check.where = abs(z), _label(p)
    return list(checks.values())


def run_validation(
    max_L: int = 6,
    grid_density: int = 5,
    trials: int = 100_000,
    seed: int = 0,
    epsilons: Sequence[float] = (0.0, 0.25, 0.5),
    analytic: Optional[Mapping[str, Callable]] = None,
    montecarlo_sets: Optional[Sequence[ModelParams]] = None,
    workers: int = 1,
    cap: int = oracle.DEFAULT_CAP,
) -> ValidationReport:
    if max_L > cap:
        raise CapExceeded(max_L, cap)
    grid = list(parameter_grid(max_L, grid_density, epsilons))
    report = ValidationReport()
    report.checks += check_analytic_vs_oracle(grid, analytic)
    report.checks += check_oracle_structure(grid)
    if trials > 0:
        sets = calibrated_parameter_sets() if montecarlo_sets is None else montecarlo_sets
        report.checks += check_montecarlo(sets, trials, seed, workers=workers)
    return report
