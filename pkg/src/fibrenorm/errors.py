"""Exception hierarchy shared by all fibrenorm modules.

Each numerical failure mode gets its own class so callers (and the CLI's
exit-code map) can react to the *kind* of breakdown, not a message string.
"""


class FibrenormError(Exception):
    """Base class for all package errors."""


class UsageError(FibrenormError):
    """Invalid arguments or configuration (CLI exit code 1)."""


class MalformedInputError(FibrenormError):
    """Input data violates a documented structural invariant."""


class RangeError(FibrenormError):
    """A quantity left the representable range (e.g. integer-width overflow)."""


class OrbitEscapeError(FibrenormError):
    """Critical orbit escaped before the requested time.

    Carries the escape time and the partial closest-return signature
    collected so far.
    """

    def __init__(self, message, escape_time=None, partial_times=None):
        super().__init__(message)
        self.escape_time = escape_time
        self.partial_times = list(partial_times or [])


class SingularRescaleError(FibrenormError):
    """Rescale factor too close to zero for a meaningful renormalization."""


class NoValidBetaError(FibrenormError):
    """No fixed point of the second iterate with negative multiplier was found."""


class PreconditionError(FibrenormError):
    """An operation's documented precondition does not hold."""


class EvalDomainError(FibrenormError):
    """Evaluation requested outside a series' disk beyond the allowed slack.

    ``excursion`` is the worst |z - center| / radius ratio encountered.
    """

    def __init__(self, message, excursion=None):
        super().__init__(message)
        self.excursion = excursion


class TruncationOverflowError(FibrenormError):
    """A fitted series fails the tail-health (spill) bound at its order."""


class CompositionDomainError(FibrenormError):
    """Inner map's image leaves the outer map's disk beyond slack.

    ``excursion`` is the worst ratio of |image - outer center| to outer radius.
    """

    def __init__(self, message, excursion=None):
        super().__init__(message)
        self.excursion = excursion


class NeutralMultiplierError(FibrenormError):
    """|1 - Df^2(beta)| is too small for implicit differentiation."""


class NonConvergenceError(FibrenormError):
    """Iterative solve stagnated; carries the residual trace."""

    def __init__(self, message, residual_trace=None):
        super().__init__(message)
        self.residual_trace = list(residual_trace or [])


class ConditioningError(FibrenormError):
    """Jacobian (numerically) singular; damping or reseeding suggested."""


class NumericalFailureError(FibrenormError):
    """A backend numerical routine failed to converge."""


class BracketError(FibrenormError):
    """A root bracket contains no sign change."""


class CombinatoricsError(FibrenormError):
    """A root was found but its closest-return signature is wrong."""


class PrecisionLimitError(FibrenormError):
    """Double precision exhausted; carries the deepest attainable index."""

    def __init__(self, message, max_attained=None):
        super().__init__(message)
        self.max_attained = max_attained


class DegenerateSequenceError(FibrenormError):
    """Consecutive-gap ratio undefined (duplicate parameters)."""


class BootstrapDomainError(FibrenormError):
    """Sampled return-map orbit left its domain; deepen or shrink disks."""


class MonodromyError(FibrenormError):
    """Preimage branch tracking lost its branch along a curve."""


class CoverageError(FibrenormError):
    """A target point is not covered by any region of the family."""


class DegenerateRegionError(FibrenormError):
    """Region has no usable interior at the sampling resolution."""


class DegenerateMapError(FibrenormError):
    """Sampled homeomorphism is not injective at the sampling scale."""


class DepthLimitError(FibrenormError):
    """Rescaling underflowed before the requested depth."""


class PersistenceError(FibrenormError):
    """Malformed or unreadable checkpoint/report file (CLI exit code 5)."""
