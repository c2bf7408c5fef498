"""Exception hierarchy.

The CLI maps each family to an exit code: metadata problems exit 2,
geometry/solver problems exit 3.
"""


class PfaRdGeoError(Exception):
    """Base class for every error raised by this package."""


class MetadataError(PfaRdGeoError):
    """Missing, malformed or inconsistent image metadata."""

    def __init__(self, message, path=None):
        super().__init__(message)
        self.path = path


class UnsupportedFormatError(MetadataError):
    """The image was not formed with the polar format algorithm."""


class UnsupportedGeometryError(MetadataError):
    """The image does not have a constant center-of-aperture time."""


class GeometryError(PfaRdGeoError):
    """A geometric computation has no valid answer for its inputs."""


class DomainError(GeometryError, ValueError):
    pass


class OrbitRangeError(GeometryError):
    """Requested time falls outside the orbit's sampled span."""


class DegenerateGeometryError(GeometryError):
    """The image-to-(R, Rdot) matrix is singular."""


class OutOfModelError(GeometryError):
    """Image coordinate maps to a non-positive slant range."""


class InvalidConeError(GeometryError):
    """|Rdot| >= |V|: the Doppler cone does not exist."""


class NoSolutionError(GeometryError):
    """The range sphere and Doppler cone miss the surface."""

    def __init__(self, message, f_min=None, f_max=None):
        super().__init__(message)
        self.f_min = f_min
        self.f_max = f_max


class ConvergenceError(GeometryError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class NodataError(GeometryError):
    """DEM has no valid height at the requested location."""


class OutOfSwathError(GeometryError):
    """No zero-Doppler crossing inside the orbit span."""


class DesignError(GeometryError):
    pass


class ResampleError(GeometryError):
    pass
