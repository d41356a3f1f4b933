"""Exception types shared across the package."""

from __future__ import annotations


class ScextError(Exception):
    """Base class for all errors raised by this package."""


class InputError(ScextError, ValueError):
    """A caller-supplied value violates a documented precondition."""


class DimensionError(InputError):
    """Mismatched or unsupported dimension."""


class EvaluationError(ScextError):
    """A function could not be evaluated at the requested point."""


class StencilError(ScextError):
    """A finite-difference stencil leaves the admissible domain."""


class HypothesisError(ScextError):
    """Test data violates the hypothesis of the inequality being probed."""


class SamplingError(ScextError):
    """No admissible sample could be drawn within the retry budget."""


class IsolationError(SamplingError):
    """No admissible interior point exists near the probe point."""


class PartitionError(ScextError):
    """Partition-of-unity weights fail their defining properties."""


class DegenerateDirectionError(ScextError):
    """The normal cone at the chosen point is degenerate ({0})."""


class PropagationLostError(ScextError):
    """Arc tracing lost the singularity before the requested horizon.

    Carries the partial arc traced so far in ``partial_arc``.
    """

    def __init__(self, message: str, partial_arc=None):
        super().__init__(message)
        self.partial_arc = partial_arc
