"""Exception hierarchy shared by all zakscatter modules."""


class ZakScatterError(Exception):
    """Base class for every error raised by this package."""


class RankDeficient(ZakScatterError):
    """A Kronecker system has (numerically) dependent columns."""


class AliasingViolation(ZakScatterError):
    """Two cover boxes are congruent modulo (L, L)."""


class GridMismatch(ZakScatterError):
    """Arrays or accumulators built on different grids were combined."""


class EmptyAccumulator(ZakScatterError):
    """Inversion was requested before any sounding was accumulated."""


class CoverTooLarge(ZakScatterError):
    """The cross-correlation estimator needs at most L boxes."""


class SingularWeights(ZakScatterError):
    """A weight entry needed on the diagonal of A_c is (close to) zero."""


class DegenerateFit(ZakScatterError):
    """Too few distinct abscissae for a least-squares slope."""


class FiducialError(ZakScatterError):
    """A fiducial data file is malformed or fails validation."""


class ParseError(ZakScatterError):
    """Malformed run configuration; carries the offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(ZakScatterError):
    """Run configuration parsed but describes an invalid experiment."""
