class QflError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(QflError, ValueError):
    pass


class NumericalError(QflError, RuntimeError):
    pass


class PositivityError(NumericalError):
    pass


class KernelError(NumericalError):
    pass
