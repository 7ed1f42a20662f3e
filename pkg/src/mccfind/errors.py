"""Exception hierarchy shared by all pipeline stages."""


class MccError(Exception):
    """Base class for all library errors."""


class InvalidInputError(MccError):
    """Input image, mask, or parameter outside the accepted domain."""


class GeometryError(MccError):
    """Degenerate geometry: collinear points, unsolvable fit, bad quad."""


class MalformedGroupError(MccError):
    """A patch group that cannot be arranged on the 4x6 chart lattice."""


class InvalidHypothesisError(MccError):
    """A chart hypothesis that cannot be scored (e.g. fully off-image)."""


class ConfigError(MccError):
    """Bad configuration file or parameter value."""


class ScoringError(MccError):
    """Prediction / ground-truth mismatch during evaluation."""
