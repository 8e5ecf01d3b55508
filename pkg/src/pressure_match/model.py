"""Domain types and deterministic process primitives.

Programs are identified by the doctor's true-preference rank: program ``i`` is
the doctor's ``i``-th most preferred program, so a matched program index *is*
its rank in the true preferences. Lists are plain tuples of program indices and
acceptance/pressure structures are frozensets.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import AbstractSet, Iterable, Optional, Tuple

from .errors import InvalidParams, NotASubset

RankOrderList = Tuple[int, ...]
AcceptanceSet = frozenset
PressureSet = frozenset


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the reduced-form market.

    ``L`` programs, each accepting the doctor independently with probability
    ``a``; each accepting program pressures with probability ``e``; the
    clearinghouse swaps the first two list entries with probability
    ``epsilon``.
    """

    L: int
    a: float
    e: float
    epsilon: float = 0.0

    def __post_init__(self):
        if isinstance(self.L, bool) or int(self.L) != self.L or self.L < 2:
            raise InvalidParams(f"L must be an integer >= 2, got {self.L!r}")
        object.__setattr__(self, "L", int(self.L))
        if not 0.0 < self.a < 1.0:
            raise InvalidParams(f"a must lie in (0, 1), got {self.a!r}")
        # e = 0 and e = 1 are the limit cases of the pressure process
        if not 0.0 <= self.e <= 1.0:
            raise InvalidParams(f"e must lie in [0, 1], got {self.e!r}")
        if not 0.0 <= self.epsilon <= 0.5:
            raise InvalidParams(f"epsilon must lie in [0, 1/2], got {self.epsilon!r}")

    def replace(self, **changes) -> "ModelParams":
        fields = {"L": self.L, "a": self.a, "e": self.e, "epsilon": self.epsilon}
        fields.update(changes)
        return ModelParams(**fields)


@dataclass(frozen=True)
class MatchOutcome:
    matched: Optional[int] = None

    @property
    def is_matched(self) -> bool:
        return self.matched is not None

    @property
    def rank_in_true_preferences(self) -> Optional[int]:
        return self.matched


def truthful_list(L: int) -> RankOrderList:
    return tuple(range(1, L + 1))


def check_permutation(entries: Iterable[int], L: Optional[int] = None) -> RankOrderList:
    """Return ``entries`` as a tuple, raising if it is not a permutation of 1..L."""
    entries = tuple(entries)
    n = len(entries) if L is None else L
    if len(entries) != n or sorted(entries) != list(range(1, n + 1)):
        raise InvalidParams(f"{entries!r} is not a permutation of 1..{n}")
    return entries


def _check_members(members: AbstractSet[int], L: int, name: str) -> None:
    bad = [i for i in members if not 1 <= i <= L]
    if bad:
        raise InvalidParams(f"{name} contains programs outside 1..{L}: {sorted(bad)}")


def build_submitted_list(pressure: AbstractSet[int], L: int) -> RankOrderList:
    """The list submitted under pressure set ``pressure``.

    With no pressure the doctor submits the truthful list. Otherwise the most
    preferred pressuring program moves to the front and everything else keeps
    its true order.
    """
    _check_members(pressure, L, "pressure set")
    if not pressure:
        return truthful_list(L)
    first = min(pressure)
    return (first,) + tuple(i for i in range(1, L + 1) if i != first)


def match(ranked: RankOrderList, acceptance: AbstractSet[int]) -> MatchOutcome:
    """First entry of ``ranked`` that belongs to ``acceptance``."""
    for program in ranked:
        if program in acceptance:
            return MatchOutcome(program)
    return MatchOutcome(None)


def swap_first_two(ranked: RankOrderList) -> RankOrderList:
    if len(ranked) < 2:
        raise InvalidParams("swap needs a list of at least two programs")
    return (ranked[1], ranked[0]) + tuple(ranked[2:])


def insert_at(ranked: RankOrderList, program: int, position: int) -> RankOrderList:
    """Move ``program`` to 1-based ``position``, keeping the others' relative order."""
    rest = [p for p in ranked if p != program]
    if not 1 <= position <= len(rest) + 1:
        raise InvalidParams(f"position {position} out of range 1..{len(rest) + 1}")
    rest.insert(position - 1, program)
    return tuple(rest)


def compliant_list(pressure: AbstractSet[int], focal: int, position: int, L: int) -> RankOrderList:
    """List of a doctor who places pressuring program ``focal`` at ``position``.

    The remaining programs are ordered as the doctor would order them under the
    pressure exerted by everyone else: the best other pressuring program (if
    any) first, then true order.
    """
    others = build_submitted_list(frozenset(pressure) - {focal}, L)
    return insert_at(others, focal, position)


def realized_rank_loss(
    acceptance: AbstractSet[int],
    pressure: AbstractSet[int],
    L: int,
    swapped: bool = False,
) -> int:
    """Rank of the match under the (possibly swapped) submitted list minus the
    rank under the truthful list. Zero when nobody accepts.

    Call with an empty ``pressure`` and ``swapped=True`` for the loss caused by
    the swap alone.
    """
    _check_members(acceptance, L, "acceptance set")
    if not set(pressure) <= set(acceptance):
        raise NotASubset(
            f"pressure set {sorted(pressure)} is not contained in acceptance set {sorted(acceptance)}"
        )
    if not acceptance:
        return 0
    ranked = build_submitted_list(pressure, L)
    if swapped:
        ranked = swap_first_two(ranked)
    actual = match(ranked, acceptance).matched
    best = min(acceptance)
    return actual - best
