"""Exception types shared across the package."""


class PgfoilError(Exception):
    """Base class for all pgfoil errors."""


class ParseError(PgfoilError):
    """Malformed textual input (designation, coordinate file, polar file).

    ``line`` carries the 1-based line number when the failure is tied to a
    specific line of the input.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnsupportedDesignationError(PgfoilError):
    """Airfoil designation outside the supported NACA families."""


class GeometryError(PgfoilError):
    """Contour or panel geometry violates a structural requirement."""


class SingularMatrixError(PgfoilError):
    """Dense solve hit a pivot too small to continue."""


class ShapeError(PgfoilError):
    """Feature width does not match the network layer it feeds."""


class DivergenceError(PgfoilError):
    """Training produced a non-finite loss."""

    def __init__(self, message, epoch=None):
        if epoch is not None:
            message = f"epoch {epoch}: {message}"
        super().__init__(message)
        self.epoch = epoch


class SchemaError(PgfoilError):
    """Dataset file lacks columns required by the requested operation."""


class NormalizationError(PgfoilError):
    """Normalization statistics missing or unusable."""
