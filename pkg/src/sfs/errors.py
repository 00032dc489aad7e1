"""Exception types shared across the package."""


class SfsError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(SfsError):
    """Malformed or inconsistent run configuration."""


class DegenerateView(SfsError):
    """Viewer direction grazes the surface where a formula divides by cos(theta_r)."""


class BrightnessOutOfRange(SfsError):
    """Image value exceeds the reflectance model's maximum (inconsistent input)."""


class NonpositiveP(SfsError):
    """The fixed-point coefficient P went negative at some node.

    Carries the offending flat node indices in ``nodes`` when available.
    """

    def __init__(self, message, nodes=None):
        super().__init__(message)
        self.nodes = nodes


class DegenerateQ(SfsError):
    """The Phong normalisation Q is numerically zero at some node."""

    def __init__(self, message, nodes=None):
        super().__init__(message)
        self.nodes = nodes


class DomainError(SfsError):
    """Argument outside the mathematical domain of a transform."""


class EmptyMask(SfsError):
    """An error metric was requested over an empty node set."""


class MalformedHeader(SfsError):
    """Image file header could not be parsed."""


class UnsupportedDepth(SfsError):
    """Image bit depth outside the supported 8/16-bit grayscale range."""


class UnsupportedConfiguration(SfsError):
    """Model/light/viewer combination has no fixed-point form in this solver."""


class NoConvergence(SfsError):
    """Fixed-point iteration hit max_iter before meeting the tolerance.

    The partial ``height`` field and the ``report`` are attached so callers
    can inspect how far the run got.
    """

    def __init__(self, message, height=None, report=None):
        super().__init__(message)
        self.height = height
        self.report = report
