"""Simulation toolkit for qubits built from degenerate atomic levels."""

from dqlab.errors import ConfigurationError, NumericalError, ValidationError

__version__ = "0.1.0"

__all__ = ["ConfigurationError", "NumericalError", "ValidationError", "__version__"]
