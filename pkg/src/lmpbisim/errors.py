"""Exception hierarchy shared by every module."""


class LmpError(Exception):
    """Base class for all errors raised by the workbench."""


class ValidationError(LmpError):
    """A model or argument failed validation (CLI exit code 3)."""


class NotMeasurable(ValidationError):
    pass


class NonMeasurableKernel(ValidationError):
    pass


class MassExceedsOne(ValidationError):
    pass


class UnknownLabelOrState(ValidationError):
    pass


class UnknownLabel(UnknownLabelOrState):
    pass


class LabelMismatch(ValidationError):
    pass


class NotStable(ValidationError):
    pass


class LeakageOutsideB(ValidationError):
    def __init__(self, state, label):
        super().__init__(f"state {state!r} leaks mass outside the subset under label {label!r}")
        self.state = state
        self.label = label


class NotEquivalence(ValidationError):
    pass


class NotInjective(ValidationError):
    pass


class NotZigzag(ValidationError):
    pass


class NotSurjective(ValidationError):
    pass


class NonMeasurableTransition(ValidationError):
    pass


class NotSymmetric(ValidationError):
    pass


class NotHitBisim(ValidationError):
    pass


class PairNotSeparable(ValidationError):
    pass


class FormulaSyntaxError(ValidationError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class TooLarge(LmpError):
    """An exhaustive search exceeds its size bound (CLI exit code 4)."""
