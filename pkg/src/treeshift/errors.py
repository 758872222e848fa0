"""Exception types shared across the package.

The CLI maps these onto exit codes: input/schema problems exit 2,
verification failures exit 1.
"""


class TreeshiftError(Exception):
    """Base class for all package errors."""


class InputError(TreeshiftError):
    """Malformed or out-of-contract input (bad file, bad schema, misuse)."""


class SpecInvalidError(TreeshiftError):
    """A chain spec violates one of its invariants."""

    def __init__(self, problems):
        self.problems = tuple(problems)
        super().__init__("; ".join(self.problems))


class DomainError(TreeshiftError):
    """A configuration domain is not left-connected or misses the identity."""


class MissingCoordinate(TreeshiftError):
    """A computation needed a coordinate outside the configuration's domain.

    Carries the absolute group element that was requested, so demand-driven
    enumerators can extend the domain and retry.
    """

    def __init__(self, word):
        self.word = word
        super().__init__(f"coordinate {word} not in domain")


class BudgetError(TreeshiftError):
    """An enumeration exceeded its configured size budget."""


class ParamsError(TreeshiftError):
    """Slide parameters are inconsistent with the chain spec."""


class OracleError(TreeshiftError):
    """An orbit-equivalence oracle is unusable (unbounded lookahead,
    ambiguous window, or undefined at a required point)."""
