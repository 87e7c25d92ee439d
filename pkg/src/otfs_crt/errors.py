"""Exception types raised across the package."""


class OtfsCrtError(Exception):
    """Base class for all package errors."""


class NotCoprime(OtfsCrtError, ValueError):
    """Two moduli (or a value and a modulus) share a common factor."""


class GridMismatch(OtfsCrtError, ValueError):
    """A DD grid's sample matrix does not match its config dimensions."""


class EmptyGrid(OtfsCrtError, ValueError):
    """Peak search was asked to run over zero candidate cells."""


class LayoutError(OtfsCrtError, ValueError):
    """Base class for frame layout validation failures."""


class CoprimeViolation(LayoutError):
    pass


class BandwidthMismatch(LayoutError):
    pass


class DurationMismatch(LayoutError):
    pass


class GuardTooWide(LayoutError):
    pass


class InsufficientData(OtfsCrtError, ValueError):
    pass


class DegenerateTruthVariance(OtfsCrtError, ValueError):
    """NMSE is undefined because every true value is identical."""


class ConfigError(OtfsCrtError, ValueError):
    """A run configuration file could not be parsed."""
