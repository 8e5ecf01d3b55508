"""Exact expectations by exhaustive enumeration.

Each program is independently in one of three states: 0 rejects the doctor,
1 accepts without pressuring, 2 accepts and pressures. Configuration index
``n`` encodes program ``j``'s state as the ``j``-th base-3 digit of ``n``
(program 1 is the least significant digit), so a full enumeration is the
counter ``0 .. 3**L - 1``.

Expectations are weighted sums over that counter. Per-configuration outcomes
do not depend on ``(a, e)``, so they are tabulated once per ``L`` with numpy and
only the weights are recomputed per parameter set. Sums go through
``math.fsum`` chunk by chunk, which keeps the result independent of how the
index range is partitioned.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Iterator, List

import numpy as np

from .errors import CapExceeded, DegenerateCondition, InvalidParams
from .model import ModelParams

DEFAULT_CAP = 16
# configurations per numpy chunk
CHUNK = 3 ** 11
# tables for L at or below this are kept in memory
_CACHE_MAX_L = 11

REJECT, SILENT, PRESSURE = 0, 1, 2


@dataclass(frozen=True)
class Configuration:
    acceptance: frozenset
    pressure: frozenset
    weight: float


def _check_cap(L: int, cap: int) -> None:
    if L > cap:
        raise CapExceeded(L, cap)


def _state_weights(params: ModelParams):
    a, e = params.a, params.e
    return (1.0 - a, a * (1.0 - e), a * e)


def enumerate(params: ModelParams, cap: int = DEFAULT_CAP) -> Iterator[Configuration]:
    """Yield all ``3**L`` configurations with their probabilities, in counter order."""
    _check_cap(params.L, cap)
    w = _state_weights(params)
    programs = range(1, params.L + 1)
    # itertools.product varies the last position fastest; reverse to put program 1 first
    for states in itertools.product((REJECT, SILENT, PRESSURE), repeat=params.L):
        states = states[::-1]
        weight = 1.0
        for s in states:
            weight *= w[s]
        yield Configuration(
            acceptance=frozenset(i for i, s in zip(programs, states) if s != REJECT),
            pressure=frozenset(i for i, s in zip(programs, states) if s == PRESSURE),
            weight=weight,
        )


def states_for(start: int, stop: int, L: int) -> np.ndarray:
    """State matrix for configuration indices ``start .. stop-1``, shape (n, L)."""
    idx = np.arange(start, stop, dtype=np.int64)
    powers = 3 ** np.arange(L, dtype=np.int64)
    return ((idx[:, None] // powers[None, :]) % 3).astype(np.int8)


@dataclass(frozen=True)
class Table:
    """Outcomes of every configuration in one chunk.

    ``fail[:, k-1]`` says whether the focal program ``L`` (when it accepts and
    pressures) loses the doctor after being placed at position ``k``.
    """

    counts: np.ndarray  # (n, 3) number of programs in each state
    match_position: np.ndarray  # position in the submitted list; L+1 if unmatched
    rank_loss: np.ndarray
    swap_loss: np.ndarray
    random_loss: np.ndarray
    focal: np.ndarray
    fail: np.ndarray


def tabulate(states: np.ndarray) -> Table:
    n, L = states.shape
    accept = states != REJECT
    press = states == PRESSURE
    n_acc = accept.sum(axis=1)
    n_press = press.sum(axis=1)
    any_acc = n_acc > 0
    any_press = n_press > 0
    best = np.where(any_acc, accept.argmax(axis=1) + 1, 0)
    best_press = np.where(any_press, press.argmax(axis=1) + 1, 0)

    # a pressuring program is listed first and always accepts
    match_position = np.where(any_press, 1, np.where(any_acc, best, L + 1))
    rank_loss = np.where(any_press, best_press - best, 0)
    swap_loss = (accept[:, 0] & accept[:, 1]).astype(np.int64)
    ranks = np.arange(1, L + 1)
    mean_rank = (accept * ranks).sum(axis=1) / np.maximum(n_acc, 1)
    random_loss = np.where(any_acc, mean_rank - best, 0.0)

    # focal program L placed at position k: positions 1..k-1 hold the best other
    # pressuring program if there is one, else others 1..k-1 in true order
    focal = states[:, L - 1] == PRESSURE
    others_press = press[:, : L - 1].any(axis=1)
    blocked = np.logical_or.accumulate(accept[:, : L - 1], axis=1)
    fail = np.zeros((n, L), dtype=bool)
    fail[:, 1:] = others_press[:, None] | blocked

    counts = np.stack([L - n_acc, n_acc - n_press, n_press], axis=1)
    return Table(counts, match_position, rank_loss, swap_loss, random_loss, focal, fail)


@functools.lru_cache(maxsize=None)
def _cached_table(L: int) -> Table:
    return tabulate(states_for(0, 3 ** L, L))


def _tables(L: int) -> Iterator[Table]:
    total = 3 ** L
    if L <= _CACHE_MAX_L:
        yield _cached_table(L)
        return
    for start in range(0, total, CHUNK):
        yield tabulate(states_for(start, min(start + CHUNK, total), L))


def _weights(table: Table, params: ModelParams, given_focal: bool = False) -> np.ndarray:
    w = _state_weights(params)
    c = table.counts
    if not given_focal:
        return np.power(w[0], c[:, 0]) * np.power(w[1], c[:, 1]) * np.power(w[2], c[:, 2])
    # conditional law given the focal program pressures: drop its own factor,
    # which stays well defined in the e -> 0 limit
    pressed = np.maximum(c[:, 2] - 1, 0)
    cond = np.power(w[0], c[:, 0]) * np.power(w[1], c[:, 1]) * np.power(w[2], pressed)
    return np.where(table.focal, cond, 0.0)


def _expect(params: ModelParams, cap: int, *terms, given_focal: bool = False):
    """Weighted sums of several per-configuration quantities in one pass.

    Each term is ``fn(table) -> array``; returns one compensated sum per term.
    """
    _check_cap(params.L, cap)
    partials: List[List[float]] = [[] for _ in terms]
    for table in _tables(params.L):
        w = _weights(table, params, given_focal)
        for out, fn in zip(partials, terms):
            out.append(math.fsum(w * fn(table)))
    return [math.fsum(p) for p in partials]


def total_weight(params: ModelParams, cap: int = DEFAULT_CAP) -> float:
    return _expect(params, cap, lambda t: np.ones(len(t.counts)))[0]


def exact_conditional_match_rates(params: ModelParams, cap: int = DEFAULT_CAP) -> List[float]:
    """P_k straight from its definition: mass matched at position k over the
    mass rejected at every earlier position."""
    L = params.L
    terms = []
    for k in range(1, L + 1):
        terms.append(lambda t, k=k: t.match_position == k)
        terms.append(lambda t, k=k: t.match_position >= k)
    sums = _expect(params, cap, *terms)
    rates = []
    for k in range(1, L + 1):
        num, den = sums[2 * (k - 1)], sums[2 * (k - 1) + 1]
        if den <= 0.0:
            raise DegenerateCondition(f"rejection by all ranks before {k} has zero probability")
        rates.append(num / den)
    return rates


def exact_rank_loss(params: ModelParams, cap: int = DEFAULT_CAP) -> float:
    return _expect(params, cap, lambda t: t.rank_loss)[0]


def exact_random_rank_loss(params: ModelParams, cap: int = DEFAULT_CAP) -> float:
    """Expected rank of a uniformly random accepting program minus the best one."""
    return _expect(params, cap, lambda t: t.random_loss)[0]


def exact_permutation_rank_loss(params: ModelParams, cap: int = DEFAULT_CAP) -> float:
    return params.epsilon * _expect(params, cap, lambda t: t.swap_loss)[0]


def exact_type1_errors(params: ModelParams, cap: int = DEFAULT_CAP) -> List[float]:
    """Type-I error for every position k = 1..L, conditional on the focal
    program (program L) accepting and pressuring, with the swap mixed in."""
    L, eps = params.L, params.epsilon
    terms = [lambda t: t.focal]
    terms += [lambda t, k=k: t.fail[:, k] for k in range(L)]
    sums = _expect(params, cap, *terms, given_focal=True)
    den, fails = sums[0], sums[1:]
    if den <= 0.0:
        raise DegenerateCondition("the focal program's conditional law has zero mass")
    plain = [f / den for f in fails]
    mixed = list(plain)
    mixed[0] = eps * plain[1] + (1.0 - eps) * plain[0]
    mixed[1] = eps * plain[0] + (1.0 - eps) * plain[1]
    return mixed


def exact_type1_error(params: ModelParams, k: int, cap: int = DEFAULT_CAP) -> float:
    if not 1 <= k <= params.L:
        raise InvalidParams(f"rank k={k} out of range 1..{params.L}")
    return exact_type1_errors(params, cap)[k - 1]
