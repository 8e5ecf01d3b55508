"""Exception hierarchy.

Every error raised by the library derives from :class:`PressureMatchError`,
which is a ``ValueError`` so callers that only care about bad input can catch
that instead.
"""


class PressureMatchError(ValueError):
    pass


class InvalidParams(PressureMatchError):
    pass


class NotASubset(PressureMatchError):
    """A pressure set contains a program outside the acceptance set."""


class Infeasible(PressureMatchError):
    """The target type-I error cannot be reached with a swap probability <= 1/2."""

    def __init__(self, alpha: float, a: float):
        self.alpha = alpha
        self.a = a
        super().__init__(
            f"alpha={alpha:g} exceeds a/2={a / 2:g}; no swap probability <= 1/2 reaches it"
        )


class CapExceeded(PressureMatchError):
    def __init__(self, L: int, cap: int):
        self.L = L
        self.cap = cap
        super().__init__(f"L={L} exceeds the enumeration cap of {cap} (3^L configurations)")


class DegenerateCondition(PressureMatchError):
    """The conditioning event of a conditional probability has zero mass."""


class InvalidObservation(PressureMatchError):
    pass


class ZeroDenominator(PressureMatchError):
    def __init__(self, rank: int, market: str = ""):
        self.rank = rank
        where = f" for market {market!r}" if market else ""
        super().__init__(f"no applicants left at risk at rank {rank}{where}")


class NegativeDenominator(PressureMatchError):
    def __init__(self, rank: int, value: int, market: str = ""):
        self.rank = rank
        self.value = value
        where = f" for market {market!r}" if market else ""
        super().__init__(
            f"inconsistent counts{where}: {value} applicants at risk at rank {rank}"
        )


class ParseError(PressureMatchError):
    """Malformed input file. Carries the file and the line (or record) at fault."""

    def __init__(self, path, location, message: str):
        self.path = str(path)
        self.location = location
        super().__init__(f"{self.path}:{location}: {message}")
