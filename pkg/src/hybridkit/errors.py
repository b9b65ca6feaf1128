"""Exception types shared across the toolkit."""

from __future__ import annotations


class HybridkitError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatch(HybridkitError):
    """State or set dimensions do not agree."""


class MalformedArc(HybridkitError):
    """A hybrid arc violates the hybrid-time-domain invariants."""


class InitialConditionOutsideCD(HybridkitError):
    """Requested solve from a point outside the closure of C u D."""


class FlowMapEvaluationFailure(HybridkitError):
    """Flow map returned a non-finite value or raised."""


class InvalidParams(HybridkitError):
    """Parameter bundle violates its declared invariants."""


class UndefinedAtPoint(HybridkitError):
    """A partial function was queried where it is undefined."""


class ApproximateDistance(HybridkitError):
    """Operation requires an exact or declared distance, got a lower bound."""


class ChainNotNested(HybridkitError):
    """Set chain failed the sampled nesting check."""


class ConfigError(HybridkitError):
    """Run configuration could not be parsed or resolved."""
