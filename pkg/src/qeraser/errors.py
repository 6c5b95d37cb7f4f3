"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`EraserError`,
itself a ``ValueError`` so callers that only care about bad input can catch
that.
"""


class EraserError(ValueError):
    pass


class InvalidDirectionError(EraserError):
    """A Bloch direction that should be a unit vector is not."""


class InvalidPurityError(EraserError):
    pass


class InvalidObservableError(EraserError):
    """Operator is not Hermitian where one is required."""


class ShapeError(EraserError):
    pass


class UndefinedConnectionError(EraserError):
    """Pancharatnam connection between (nearly) orthogonal states."""


class DegenerateLoopError(EraserError):
    def __init__(self, edge, modulus):
        self.edge = edge
        self.modulus = modulus
        super().__init__(
            f"degenerate loop: overlap on edge {edge[0]}->{edge[1]} has modulus {modulus:.3e}"
        )


class AmbiguousLiftError(EraserError):
    """Equator lift requested for a pole state (azimuth undefined)."""


class OrthogonalPostselectionError(EraserError):
    pass


class UndefinedArgumentError(EraserError):
    pass


class DivisionUndefinedError(EraserError):
    pass


class CollinearConfigurationError(EraserError):
    """Initial meter direction parallel or antiparallel to the control axis."""


class EraserConditionError(EraserError):
    """Final meter direction not orthogonal to the control axis."""


class NoPostselectionError(EraserError):
    pass


class DegenerateStrengthError(EraserError):
    pass


class SingularCoefficientError(EraserError):
    pass


class InconsistentVisibilityError(EraserError):
    """Visibility above the maximum reachable for the given strength and purity."""


class ModelViolationError(EraserError):
    pass


class InvalidProbabilityError(EraserError):
    pass


class NoFringeError(EraserError):
    def __init__(self, message="no fringe: counts are flat in the phase setting"):
        super().__init__(message)
        self.v_hat = 0.0
