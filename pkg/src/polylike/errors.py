"""Exception types raised by the polylike library.

Every failure that the numerical procedures can detect gets its own class so
that callers (and the CLI) can report *which* hypothesis failed instead of a
generic ``ValueError``.
"""

from __future__ import annotations


class PolylikeError(Exception):
    """Base class for all library errors."""


class DomainError(PolylikeError, ValueError):
    """An argument lies outside the domain of the requested formula."""


class NoSuchFixedPoint(PolylikeError):
    """The map has no real fixed point with negative derivative."""


class BranchAmbiguity(PolylikeError):
    """Two inverse branches are equally close to the reference orbit."""


class PeriodicAttractor(PolylikeError):
    """An attracting cycle absorbs the orbit under study."""


class Renormalizable(PolylikeError):
    """The construction requires a non-renormalizable map at this scale."""


class BudgetExhausted(PolylikeError):
    """An orbit did not return within the iteration budget."""


class Degenerate(PolylikeError):
    """An orbit point sits on a branch boundary within tolerance."""


class DepthExhausted(PolylikeError):
    """Closest-return search ran past its iteration cap."""


class HighReturn(PolylikeError):
    """A low-return operator was applied to a map with a high return."""


class AttractorDetected(PolylikeError):
    """The central orbit never leaves the central domain within budget."""


class SearchFailed(PolylikeError):
    """A constrained point search found no admissible candidate."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class EmptyInterval(PolylikeError):
    """A maximal interval degenerated to a point."""


class NoIntersection(PolylikeError):
    """Two boundary curves do not meet where the solver expected."""


class SamplingTooCoarse(PolylikeError):
    """Adjacent curve samples straddle a region boundary."""


class VariantMismatch(PolylikeError):
    """The requested domain variant does not apply to the given level."""


class ExtensionTooShort(PolylikeError):
    """The monotone extension of the pullback does not cover the domain."""


class FitinViolated(PolylikeError):
    """Condition (fitin) fails for the central branch."""

    def __init__(self, message: str, ratio: float):
        super().__init__(message)
        self.ratio = ratio


class DomainOverlap(PolylikeError):
    """Two off-central domains have overlapping real traces."""


class NoRoot(PolylikeError):
    """The bracket holds no sign change of the target function."""


class WrongMinimalPeriod(PolylikeError):
    """The superstable orbit found has a smaller period than requested."""


class NoParameterInBracket(PolylikeError):
    """No parameter in the bracket realises the requested combinatorics."""
