"""Exception hierarchy. Configuration problems derive from ConfigError,
numerical failures from NumericError (the CLI maps them to exit codes 2 and 3)."""


class GravikitError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(GravikitError):
    """Invalid user input: scene, parameters or configuration file."""


class NumericError(GravikitError):
    """A numerical procedure could not meet its accuracy contract."""


# -- scenes ------------------------------------------------------------------

class SceneError(ConfigError):
    pass


class DegenerateLattice(SceneError):
    pass


class PointOnFixedLocus(SceneError):
    pass


class DuplicatePoint(SceneError):
    pass


class TooManyPoints(SceneError):
    pass


class ValidationError(ConfigError):
    """Aggregates the scene errors reported by validate_scene."""

    def __init__(self, errors):
        self.errors = list(errors)
        names = "; ".join(f"{type(e).__name__}: {e}" for e in self.errors)
        super().__init__(names or "invalid scene")


class ParseError(ConfigError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


# -- evaluation domain -------------------------------------------------------

class AtSingularity(NumericError):
    pass


class TooCloseToSingularity(NumericError):
    pass


class OnDiracString(NumericError):
    """The point lies outside the chart, whose domain excludes the Dirac string."""


class NonPositiveHarmonic(NumericError):
    pass


class InsideAsymptoticCutoff(NumericError):
    pass


class StencilCrossesSeam(NumericError):
    pass


class DegenerateTriple(NumericError):
    pass


# -- accuracy ----------------------------------------------------------------

class TruncationNotConverged(NumericError):
    pass


class QuadratureNotConverged(NumericError):
    pass


class ExtrapolationUnstable(NumericError):
    pass


class PoorFit(NumericError):
    pass


class InsufficientSweepPoints(ConfigError):
    pass


# -- topology ----------------------------------------------------------------

class InvalidRank(ConfigError):
    pass


class InvalidN(ConfigError):
    pass


class NotSpecifiedInPaper(GravikitError):
    """The requested topological datum is not tabulated for this lattice rank."""
