"""Quantum Fisher information of a dissipative qubit under direct photodetection feedback."""

from .errors import ConfigError, KernelError, NumericalError, PositivityError, QflError

__version__ = "0.1.0"

__all__ = ["ConfigError", "KernelError", "NumericalError", "PositivityError", "QflError", "__version__"]
