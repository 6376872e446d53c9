"""Exception types shared across the package."""


class AdasubError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(AdasubError):
    """An object violates one of its structural invariants."""


class ParseError(AdasubError):
    """An instance file is malformed (missing field, wrong type, bad syntax)."""


class ZeroProbabilityEvidence(AdasubError):
    """Conditioning on a partial realization that has zero prior probability."""


class ExactModeUnavailable(AdasubError):
    """Exact expectation requested but the conditioned support is not enumerable."""


class InstanceTooLarge(AdasubError):
    """An exhaustive computation was asked for on an instance above its hard caps."""


class PolicyViolation(AdasubError):
    """A policy returned an infeasible or already-selected item."""
