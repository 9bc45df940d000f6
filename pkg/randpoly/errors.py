"""
Exception hierarchy for the randpoly library.

Every error the library raises derives from RandpolyError so the CLI can
catch one type. Conditions that are reported rather than raised (greedy
budget too small, perturbation applied, chain non-convergence) are flags
on the result objects instead.
"""


class RandpolyError(Exception):
    """Base class for all library errors."""


class CycleLimitExceeded(RandpolyError):
    """Simplex pivot count exceeded the configured cap."""


class NumericalBreakdown(RandpolyError):
    """Pivot element below the pivot floor, or a failed residual check."""


class DimensionMismatch(RandpolyError):
    """Point or direction dimension does not match the body/frame."""


class NotEnoughSamples(RandpolyError):
    """Moment order too large for the cached sample (q > 2 ln M)."""


class BracketFailure(RandpolyError):
    """No sign change on the psi-norm bisection bracket."""


class LowAcceptance(RandpolyError):
    """Rejection sampling acceptance below the usable floor."""


class DegenerateInput(RandpolyError):
    """Point set is not full-dimensional (or stays coplanar after jitter)."""


class CapExceeded(RandpolyError):
    """Dimension beyond the exact-hull cap."""


class SingularFacet(RandpolyError):
    """Facet vertex matrix is singular."""


class Coplanar(RandpolyError):
    """Raised inside the incremental hull when general position fails."""


class ConfigError(RandpolyError):
    """Invalid experiment configuration; names the offending field."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
