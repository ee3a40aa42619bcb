"""Exception hierarchy shared by all modules."""


class ModelError(ValueError):
    """Base class for every error raised by this package."""


class InputShapeError(ModelError):
    """Sequence lengths disagree with each other or with the step count."""


class InputError(ModelError):
    """A value is non-finite or outside its admissible range."""


class DegenerateError(ModelError):
    """A quantity that must be nonzero (volatility, control, price) is zero."""


class StepSizeError(ModelError):
    """A surrogate factor is nonpositive: the step size is too large."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class QuadratureError(ModelError):
    """Adaptive integration failed to reach its error target."""


class ConfigError(ModelError):
    """Experiment configuration is malformed."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field
