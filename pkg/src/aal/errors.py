"""Exception hierarchy for the workbench."""


class AALError(Exception):
    """Base class for all workbench errors."""


class CapExceeded(AALError):
    """A group or enumeration box is larger than the configured cap."""


class GroupMismatch(AALError):
    """Operands live in different groups."""


class ParseError(AALError, ValueError):
    """A group, set or config literal could not be parsed."""


class EmptySet(AALError, ValueError):
    pass


class BadThreshold(AALError, ValueError):
    pass


class BadEps(AALError, ValueError):
    pass


class BadDelta(AALError, ValueError):
    pass


class UnboundedBody(AALError, ValueError):
    """Slab normals do not span R^d, so the body is unbounded."""


class TruncationSuspected(AALError):
    """A body point was found on the enumeration shell ||x||_inf = R."""


class HypothesisFails(AALError):
    """A theorem's hypothesis does not hold on the given instance."""


class EqualityCertificateFails(AALError):
    """A constructed object does not equal its target set elementwise."""


class NotSymmetric(AALError, ValueError):
    pass


class NoGoodTuples(AALError):
    """Every sampled tuple failed the approximation test."""

    def __init__(self, message: str, best_error: float):
        super().__init__(message)
        self.best_error = best_error


class StepLimit(AALError):
    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


class EmptyIntersection(AALError):
    pass


class EnergyTooSmall(AALError, ValueError):
    pass


class NoCandidate(AALError):
    pass


class CannotFindIndependent(AALError):
    def __init__(self, message: str, k_max: int):
        super().__init__(message)
        self.k_max = k_max


class TooFewFactors(AALError, ValueError):
    pass


class NonInjectiveAP(AALError, ValueError):
    pass


class CertificateError(AALError):
    """An identity that must hold exactly was violated (indicates a bug)."""


class PartialReport(AALError):
    """A pipeline stage failed; carries the stage name and what was computed so far."""

    def __init__(self, stage: str, partial: dict, cause: Exception):
        super().__init__(f"pipeline stage {stage!r} failed: {cause}")
        self.stage = stage
        self.partial = partial
        self.cause = cause


class ConfigError(AALError, ValueError):
    """Experiment config is invalid; message names the offending field."""
