"""Seeded Monte Carlo simulation of the pressure/acceptance/swap process.

Every trial draws the acceptance set, the pressure set inside it and the swap
coin, builds the submitted list explicitly and runs the matching rule on it.
All tallies are integer counts, so merging per-worker results is exact and a
run is bit-reproducible for a fixed ``(seed, workers)`` pair.

Worker ``w`` draws from ``numpy.random.default_rng(splitmix64(seed + w))``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List

import numpy as np

from .errors import InvalidParams
from .model import ModelParams

MASK64 = (1 << 64) - 1
LOW_CONFIDENCE = 100


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def worker_seed(seed: int, worker: int) -> int:
    return splitmix64((seed + worker) & MASK64)


@dataclass(frozen=True)
class SimulationConfig:
    params: ModelParams
    trials: int
    seed: int = 0
    workers: int = 1
    batch_size: int = 100_000

    def __post_init__(self):
        if self.trials < 1:
            raise InvalidParams(f"trials must be >= 1, got {self.trials}")
        if self.workers < 1:
            raise InvalidParams(f"workers must be >= 1, got {self.workers}")
        if self.batch_size < 1:
            raise InvalidParams(f"batch_size must be >= 1, got {self.batch_size}")


@dataclass(frozen=True)
class EstimateWithError:
    """Sample mean with its standard error.

    ``trials`` is the effective sample size; for conditional estimates that is
    the number of trials meeting the condition.
    """

    mean: float
    std_error: float
    trials: int

    @property
    def low_confidence(self) -> bool:
        return self.trials < LOW_CONFIDENCE

    def z_score(self, target: float) -> float:
        if self.std_error == 0.0:
            return 0.0 if self.mean == target else math.inf
        return (self.mean - target) / self.std_error


def _estimate(n: int, total: int, total_sq: int) -> EstimateWithError:
    if n == 0:
        return EstimateWithError(math.nan, math.nan, 0)
    mean = total / n
    if n == 1:
        return EstimateWithError(mean, 0.0, 1)
    var = max((total_sq - total * total / n) / (n - 1), 0.0)
    return EstimateWithError(mean, math.sqrt(var / n), n)


def _binomial(n: int, hits: int) -> EstimateWithError:
    return _estimate(n, hits, hits)


@dataclass
class Tally:
    """Integer partial sums for one worker."""

    L: int
    trials: int = 0
    at_risk: np.ndarray = None
    matched_at: np.ndarray = None
    rl: int = 0
    rl_sq: int = 0
    rand: int = 0
    rand_sq: int = 0
    prl: int = 0
    prl_sq: int = 0
    focal: int = 0
    fail_plain: np.ndarray = None
    fail_swap: np.ndarray = None

    def __post_init__(self):
        for name in ("at_risk", "matched_at", "fail_plain", "fail_swap"):
            if getattr(self, name) is None:
                setattr(self, name, np.zeros(self.L, dtype=np.int64))

    def merge(self, other: "Tally") -> "Tally":
        out = Tally(self.L)
        for name in ("trials", "rl", "rl_sq", "rand", "rand_sq", "prl", "prl_sq", "focal"):
            setattr(out, name, int(getattr(self, name)) + int(getattr(other, name)))
        for name in ("at_risk", "matched_at", "fail_plain", "fail_swap"):
            setattr(out, name, getattr(self, name) + getattr(other, name))
        return out


@dataclass(frozen=True)
class SimulationResult:
    params: ModelParams
    trials: int
    seed: int
    workers: int
    match_rates: List[EstimateWithError]
    rank_loss: EstimateWithError
    random_rank_loss: EstimateWithError
    permutation_rank_loss: EstimateWithError
    type1_no_swap: List[EstimateWithError]
    type1_with_swap: List[EstimateWithError]

    @property
    def q_lower(self) -> EstimateWithError:
        return self.type1_no_swap[1]

    def summary(self) -> dict:
        """Flat ``name -> estimate`` view, used by reports."""
        out = {}
        for k, est in enumerate(self.match_rates, 1):
            out[f"P{k}"] = est
        out["RL"] = self.rank_loss
        out["RL_rand"] = self.random_rank_loss
        out["PRL"] = self.permutation_rank_loss
        for k, est in enumerate(self.type1_no_swap, 1):
            out[f"Q{k}"] = est
        for k, est in enumerate(self.type1_with_swap, 1):
            out[f"Q{k}_swap"] = est
        return out


def _first_accepted(ranked: np.ndarray, accept: np.ndarray) -> np.ndarray:
    """Program matched under each row's list; 0 when nobody on it accepts."""
    hit = np.take_along_axis(accept, ranked - 1, axis=1)
    found = hit.any(axis=1)
    pos = hit.argmax(axis=1)
    return np.where(found, ranked[np.arange(len(ranked)), pos], 0)


def _submitted_lists(press: np.ndarray) -> np.ndarray:
    """Row-wise submitted lists: best pressuring program first, rest in true order."""
    n, L = press.shape
    keys = np.tile(np.arange(1, L + 1), (n, 1))
    any_press = press.any(axis=1)
    rows = np.flatnonzero(any_press)
    keys[rows, press[rows].argmax(axis=1)] = 0
    return np.argsort(keys, axis=1, kind="stable") + 1


def _swap(lists: np.ndarray, coin: np.ndarray) -> np.ndarray:
    out = lists.copy()
    out[coin, 0] = lists[coin, 1]
    out[coin, 1] = lists[coin, 0]
    return out


def _run_batch(rng: np.random.Generator, params: ModelParams, n: int, tally: Tally) -> None:
    L, a, e, eps = params.L, params.a, params.e, params.epsilon
    accept = rng.random((n, L)) < a
    press = accept & (rng.random((n, L)) < e)
    coin = rng.random(n) < eps
    pick_keys = rng.random((n, L))

    truthful = np.tile(np.arange(1, L + 1), (n, 1))
    submitted = _submitted_lists(press)
    best = _first_accepted(truthful, accept)
    got = _first_accepted(submitted, accept)
    matched = got > 0

    # position of the match in the submitted list, L+1 when unmatched
    position = np.full(n, L + 1)
    position[matched] = (submitted[matched] == got[matched, None]).argmax(axis=1) + 1
    ks = np.arange(1, L + 1)
    tally.at_risk += (position[:, None] >= ks[None, :]).sum(axis=0)
    tally.matched_at += (position[:, None] == ks[None, :]).sum(axis=0)

    rl = np.where(matched, got - best, 0)
    tally.rl += int(rl.sum())
    tally.rl_sq += int((rl * rl).sum())

    # uniform pick among accepting programs
    masked = np.where(accept, pick_keys, -1.0)
    random_pick = masked.argmax(axis=1) + 1
    rand = np.where(best > 0, random_pick - best, 0)
    tally.rand += int(rand.sum())
    tally.rand_sq += int((rand * rand).sum())

    swapped_truthful = _swap(truthful, coin)
    prl = np.where(best > 0, _first_accepted(swapped_truthful, accept) - best, 0)
    tally.prl += int(prl.sum())
    tally.prl_sq += int((prl * prl).sum())

    # compliance check for focal program L when it accepts and pressures
    focal = press[:, L - 1]
    tally.focal += int(focal.sum())
    if focal.any():
        f_accept = accept[focal]
        f_press = press[focal, : L - 1]
        f_coin = coin[focal]
        others = _submitted_lists(f_press)
        m = len(others)
        for k in range(1, L + 1):
            ranked = np.concatenate(
                [others[:, : k - 1], np.full((m, 1), L), others[:, k - 1 :]], axis=1
            )
            plain = _first_accepted(ranked, f_accept) != L
            swapped = _first_accepted(_swap(ranked, f_coin), f_accept) != L
            tally.fail_plain[k - 1] += int(plain.sum())
            tally.fail_swap[k - 1] += int(swapped.sum())

    tally.trials += n


def _run_worker(config: SimulationConfig, worker: int, trials: int) -> Tally:
    rng = np.random.default_rng(worker_seed(config.seed, worker))
    tally = Tally(config.params.L)
    done = 0
    while done < trials:
        n = min(config.batch_size, trials - done)
        _run_batch(rng, config.params, n, tally)
        done += n
    return tally


def _split(trials: int, workers: int) -> List[int]:
    base, extra = divmod(trials, workers)
    return [base + (1 if w < extra else 0) for w in range(workers)]


def simulate_statistics(config: SimulationConfig) -> SimulationResult:
    """Run the simulation and summarise every statistic with its standard error."""
    shares = _split(config.trials, config.workers)
    if config.workers == 1:
        tallies = [_run_worker(config, 0, shares[0])]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            futures = [
                pool.submit(_run_worker, config, w, share) for w, share in enumerate(shares)
            ]
            tallies = [f.result() for f in futures]
    total = tallies[0]
    for t in tallies[1:]:
        total = total.merge(t)

    L = config.params.L
    rates = [_binomial(int(total.at_risk[k]), int(total.matched_at[k])) for k in range(L)]
    n = total.trials
    return SimulationResult(
        params=config.params,
        trials=n,
        seed=config.seed,
        workers=config.workers,
        match_rates=rates,
        rank_loss=_estimate(n, total.rl, total.rl_sq),
        random_rank_loss=_estimate(n, total.rand, total.rand_sq),
        permutation_rank_loss=_estimate(n, total.prl, total.prl_sq),
        type1_no_swap=[_binomial(total.focal, int(x)) for x in total.fail_plain],
        type1_with_swap=[_binomial(total.focal, int(x)) for x in total.fail_swap],
    )


def simulate(
    params: ModelParams, trials: int, seed: int = 0, workers: int = 1
) -> SimulationResult:
    return simulate_statistics(SimulationConfig(params, trials, seed, workers))
