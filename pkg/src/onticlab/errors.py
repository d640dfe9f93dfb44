"""Exception hierarchy shared by every onticlab module."""

from __future__ import annotations


class OnticLabError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(OnticLabError, ValueError):
    pass


class NonUnitary(OnticLabError, ValueError):
    pass


class NonOrthonormalBasis(OnticLabError, ValueError):
    pass


class NotOrthonormal(OnticLabError, ValueError):
    pass


class Overconstrained(OnticLabError, ValueError):
    pass


class UnknownName(OnticLabError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return str(self.args[0]) if self.args else ""


class AmbiguousZero(OnticLabError, ValueError):
    """A probability sits between tol_zero and tol_zero_guard."""

    def __init__(self, context, probability: float):
        self.context = context
        self.probability = probability
        super().__init__(
            f"probability {probability:.3e} for {context} lies in the ambiguous band"
        )


class ScenarioFormatError(OnticLabError, ValueError):
    """Invalid scenario/model document; ``path`` points into the document."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class PreconditionNotApplicable(OnticLabError, ValueError):
    pass


class OutOfRange(OnticLabError, ValueError):
    pass


class Infeasible(OnticLabError):
    """The construction needs more dimensions than available."""

    def __init__(self, M: int, N: int):
        self.M = M
        self.N = N
        self.minimal_N = M
        super().__init__(f"M={M} exceeds N={N}; minimal feasible N is {M}")


class ConditionViolated(OnticLabError):
    def __init__(self, n: int, first: float, second: float):
        self.n = n
        self.first = first
        self.second = second
        super().__init__(
            f"n={n}: |<d_n|a0>|={first:.3e} and |<d_n|c[n]>|={second:.3e} are both nonzero"
        )


class ConditionNotMet(OnticLabError):
    pass


class InvalidConfig(OnticLabError, ValueError):
    pass


class BudgetExceeded(OnticLabError):
    def __init__(self, explored: int, stats: dict):
        self.explored = explored
        self.stats = stats
        super().__init__(f"search budget exceeded after {explored} assignments")


class TraceSyntaxError(OnticLabError, ValueError):
    pass
