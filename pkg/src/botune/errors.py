"""Exception hierarchy.

Everything raised deliberately by this package derives from BotuneError so
callers can catch one base class at the loop boundary.
"""


class BotuneError(Exception):
    pass


# --- search space ---------------------------------------------------------

class InvalidSpace(BotuneError):
    """Search space is empty or structurally invalid."""


class OutOfDomain(BotuneError):
    """A value or unit-cube coordinate falls outside its domain."""


class UnknownDimension(BotuneError):
    """A mutation targets a dimension name the space does not have."""


class DuplicateDimension(BotuneError):
    """AddDimension would reuse an existing dimension name."""


class InvalidMutation(BotuneError):
    """Mutation is incompatible with the target domain kind."""


# --- surrogate / acquisition ----------------------------------------------

class DimensionMismatch(BotuneError):
    """Point dimensionality disagrees with the model or kernel."""


class NumericalFailure(BotuneError):
    """Factorization failed even after exhausting the jitter ladder."""


class InsufficientData(BotuneError):
    """Too few observations to build a model."""


class InvalidInput(BotuneError):
    """Argument violates a numeric precondition (e.g. negative std)."""


# --- diagnosis -------------------------------------------------------------

class EmptyHistory(BotuneError):
    """Operation requires at least one epoch record."""


class InsufficientHistory(BotuneError):
    """Series too short for the requested statistic."""


# --- rules ------------------------------------------------------------------

class RuleBindingError(BotuneError):
    """No dimension carries the semantic role a rule needs to bind to."""


# --- controller / persistence -----------------------------------------------

class IncompatibleSpaces(BotuneError):
    """Checkpoint migration target is not derivable from the source space."""


class CheckpointCorrupt(BotuneError):
    """Checkpoint file cannot be parsed or is structurally broken."""


class UnsupportedVersion(BotuneError):
    """Checkpoint was written by a newer format version."""


class ConfigError(BotuneError):
    """Experiment configuration file is missing or invalid."""


# --- trainees ----------------------------------------------------------------

class TraineeError(BotuneError):
    """Base class for failures of a training execution."""


class TraineeTimeout(TraineeError):
    pass


class TraineeCrashed(TraineeError):
    pass


class ProtocolError(TraineeError):
    """Malformed or out-of-order wire message; carries the line number."""

    def __init__(self, message, line_no=None):
        super().__init__(message if line_no is None else f"line {line_no}: {message}")
        self.line_no = line_no


class TrainingDiverged(TraineeError):
    """Loss became non-finite mid-training; carries the partial series."""

    def __init__(self, message, partial_history=None):
        super().__init__(message)
        self.partial_history = partial_history


class FormatError(BotuneError):
    """Binary dataset container violates its format."""
