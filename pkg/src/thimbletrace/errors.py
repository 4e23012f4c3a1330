"""Shared exception types.

Every numerical failure mode raised by this package derives from
:class:`ThimbletraceError` so callers (and the CLI) can distinguish
"bad input" from "the computation itself broke down".
"""


class ThimbletraceError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ThimbletraceError):
    """Invalid input data (bad coefficients, nonpositive sigma, ...)."""


class DegenerateEnergyError(ThimbletraceError):
    """Energy sits at (or too close to) a critical value of the potential.

    Two branch points of E - V(q) collided; period integrals diverge
    logarithmically there.  Carries the offending cluster of roots.
    """

    def __init__(self, message, cluster=None):
        super().__init__(message)
        self.cluster = list(cluster) if cluster is not None else []


class ContourDegeneracyError(ThimbletraceError):
    """An integration contour passes too close to a branch point."""


class NoRealOrbitError(ThimbletraceError):
    """No classically allowed real motion at the requested energy."""


class BasisMismatchError(ThimbletraceError):
    """Orbit periods do not match an integer combination of generators."""


class CausticError(ThimbletraceError):
    """Degenerate critical point: the Morse (nondegeneracy) assumption fails."""


class FlowStallError(ThimbletraceError):
    """Gradient-flow integration underflowed its step size."""


class AmbiguousIntersectionError(ThimbletraceError):
    """A dual thimble meets the real axis tangentially; the intersection
    count cannot be decided at working precision."""


class TruncationError(ThimbletraceError):
    """A contour or sum was truncated before the integrand decayed enough."""


class OracleFailureError(ThimbletraceError):
    """The independent verification oracle failed to converge."""


class ResolutionError(ThimbletraceError):
    """Spectral/grid resolution too small for the requested accuracy."""


class NoConvergenceError(ThimbletraceError):
    """Iterative solver failed to converge.  Carries the residual history."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []


class DegenerateOrbitError(ThimbletraceError):
    """Second variation around an orbit has more zero modes than the
    critical-manifold pair."""


class NoVolumeError(ThimbletraceError):
    """Requested energy lies below the minimum of the potential."""
