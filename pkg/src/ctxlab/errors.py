"""Exception hierarchy for ctxlab."""


class CtxlabError(Exception):
    """Base class for all ctxlab errors."""


class TensorError(CtxlabError):
    """Base class for linear-algebra layer errors."""


class DimensionError(TensorError):
    """Matrix is not square, not a power of 2, or exceeds the 4-qubit register."""


class NotHermitianError(TensorError):
    """Matrix is not Hermitian within tolerance."""


class NotInvolutionError(TensorError):
    """Matrix does not square to the identity within tolerance."""


class UnknownPauliLabelError(TensorError):
    """Pauli string contains a label outside {I, X, Y, Z}."""


class ScenarioError(CtxlabError):
    """Base class for scenario construction errors."""


class InvalidParameterError(ScenarioError):
    """State or setting parameter outside its documented range."""


class InvalidSpecError(ScenarioError):
    """Correlation spec or expression is malformed."""


class MeasurementError(CtxlabError):
    """Base class for sequential-measurement engine errors."""


class RegisterMismatchError(MeasurementError):
    """Observable does not fit the state's register or party layout."""


class ProbabilityError(MeasurementError):
    """Outcome distribution is not normalized."""


class IncompatibleContextError(MeasurementError):
    """A context handed to the no-disturbance check contains non-commuting observables."""


class BoundsError(CtxlabError):
    """Base class for hidden-variable oracle errors."""


class BehaviorTableError(BoundsError):
    """Behavior table violates normalization, positivity or no-disturbance."""


class RunnerError(CtxlabError):
    """Base class for CLI runner errors."""


class ScenarioConfigError(RunnerError):
    """Scenario configuration is invalid."""


class NoCrossingError(RunnerError):
    """Threshold scan found no sign change of the scanned quantity."""
