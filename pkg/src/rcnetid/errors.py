"""Exception taxonomy shared across the package.

Every error that signals "this model is not an RC network" or "this solver
stage cannot proceed" derives from :class:`RCNetError` so callers can catch
one base class at the pipeline boundary.
"""

from __future__ import annotations


class RCNetError(Exception):
    """Base class for all rcnetid errors."""


class NotRCRealizable(RCNetError):
    """The system matrix has complex or defective eigenstructure.

    Raised by the diagonalization gate: a model whose A matrix is not
    diagonalizable with real eigenvalues cannot be similar to G^-1 S with
    S symmetric and G positive diagonal.
    """


class GramMismatch(RCNetError):
    """Two matrices that must share a Gram matrix do not, beyond tolerance."""


class NotPositiveDefinite(RCNetError):
    """A matrix required to be symmetric positive definite is not."""


class BothConstraintsActive(RCNetError):
    """Convex scaling solver called with both B and C constraints present."""


class TrivialCone(RCNetError):
    """The scaling feasibility cone contains only the origin."""


class NoStrictlyPositive(RCNetError):
    """No conic combination of generators has all required coordinates > 0."""


class NoFeasiblePoint(RCNetError):
    """Joint nonconvex scaling solve ended above the feasibility tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class SingularT(RCNetError):
    """Assembled transformation matrix is numerically singular."""


class GenerationBudgetExceeded(RCNetError):
    """Random instance generation failed to meet constraints within budget."""


class NodeCountMismatch(RCNetError):
    """Graph comparison called on graphs with different node counts."""
