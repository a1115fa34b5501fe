class QhosvdError(Exception):
    """Base class for errors raised by this package."""


class ShapeError(QhosvdError, ValueError):
    pass


class ModeError(QhosvdError, ValueError):
    pass


class ParameterError(QhosvdError, ValueError):
    pass


class ConvergenceError(QhosvdError, RuntimeError):
    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


class IntegrityError(QhosvdError, RuntimeError):
    pass


class ImageFormatError(QhosvdError, ValueError):
    pass
