"""Gaussian-moment model of polariton-based quantum cloning with a Fock-space oracle."""

from .errors import InvalidArgumentError, UnsupportedConfigurationError
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "InvalidArgumentError", "UnsupportedConfigurationError", "__version__"]
