"""Exceptions raised by the analysis services.

Every exception carries the exit code the CLI reports when it escapes a
command.
"""


class LossModesError(Exception):
    """Base class for all lossmodes errors."""
    exit_code = 1


class StructuralError(LossModesError):
    """Matrices or vectors with mismatched dimensions."""
    exit_code = 2


class DataError(LossModesError):
    """Non-finite or otherwise unusable numeric entries."""
    exit_code = 2


class SystemParseError(LossModesError):
    """A system definition could not be read or is missing keys."""
    exit_code = 2


class InvariantViolation(LossModesError):
    """A structural invariant of the model does not hold."""
    exit_code = 1


class NotPSDError(InvariantViolation):
    """A matrix expected to be positive semidefinite has a negative
    eigenvalue beyond tolerance."""


class ConditioningError(InvariantViolation):
    """A matrix that has to be inverted is singular to tolerance."""


class BandViolation(InvariantViolation):
    """An eigenvalue lies outside its predicted damping band."""


class PreconditionError(LossModesError):
    """The inputs do not satisfy the hypothesis of the requested check."""
    exit_code = 1


class InconsistencyError(PreconditionError):
    """Eigen data that should correspond does not."""


class ClassificationAmbiguityError(PreconditionError):
    """An eigenvalue cannot be assigned to exactly one spectral cluster."""


class SamplingError(PreconditionError):
    """A trajectory is too coarse or too short for finite differencing."""


class InapplicableTheoremError(PreconditionError):
    """The requested identity only holds for another regime."""


class DegenerateFitError(PreconditionError):
    """Not enough points to fit a trend."""


class UnsupportedError(LossModesError):
    """The operation is undefined for the given input (e.g. zeta = 0)."""
    exit_code = 1


class ParameterError(LossModesError):
    """Invalid parameters for an example builder."""
    exit_code = 1


class SingularBlockError(LossModesError):
    """The Schur complement path needs an invertible lower-right block."""
    exit_code = 1


class SolverError(LossModesError):
    """The dense eigensolver failed or violated its residual contract."""
    exit_code = 3


class TrackingError(SolverError):
    """Eigenvalues could not be continued across a loss parameter grid."""


class IntegratorError(LossModesError):
    """Time integration aborted (usually stiffness at large loss)."""
    exit_code = 4


class UnsupportedRegimeError(LossModesError):
    """The overdamping theory only covers systems without gyroscopy."""
    exit_code = 5
