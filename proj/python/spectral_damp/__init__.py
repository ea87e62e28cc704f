"""Python bindings for the spectral_damp C++ library."""

from ._spectral_damp import *  # noqa: F401,F403
from ._spectral_damp import __doc__  # noqa: F401

__version__ = "0.1.0"
