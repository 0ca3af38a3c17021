"""Exception taxonomy shared by every module.

The CLI maps these onto exit codes, so the split matters:
parse errors (2), domain/precondition violations (3), exhausted
budgets or precision ceilings (4).
"""

from __future__ import annotations

__all__ = [
    "TransasymError",
    "ParseError",
    "DomainError",
    "GroupMismatchError",
    "ZeroSeriesError",
    "BudgetError",
    "PrecisionError",
    "ComparisonUndecided",
]


class TransasymError(Exception):
    """Base class for all engine errors."""


class ParseError(TransasymError):
    """Bad input text; carries the offending position."""

    def __init__(self, message: str, text: str = "", pos: int = -1):
        self.text = text
        self.pos = pos
        if pos >= 0:
            message = f"{message} (at position {pos}: {text[pos:pos + 12]!r})"
        super().__init__(message)


class DomainError(TransasymError):
    """Precondition violation: division by zero, log of a non-positive
    germ, class-function argument not infinitesimal, and the like."""


class GroupMismatchError(DomainError):
    """Series arguments live over different monomial groups."""


class ZeroSeriesError(DomainError):
    """Leading-term request on the zero series."""


class BudgetError(TransasymError):
    """A step or stream budget ran out before the algorithm finished.

    Carries a diagnostic payload (e.g. the surviving monomial pair of a
    stuck monomialization) so callers can report something actionable.
    """

    def __init__(self, message: str, diagnostic: object = None):
        self.diagnostic = diagnostic
        super().__init__(message)


class PrecisionError(TransasymError):
    """The precision ceiling was reached before the requested enclosure
    width (or a numeric verdict) could be achieved."""


class ComparisonUndecided(PrecisionError):
    """Interval refinement hit the cap with the sign still straddling 0.

    Under the declared algebraic-independence assumption this should not
    happen; seeing it usually means two adjoined constants are secretly
    dependent."""
