"""Python bindings for the svi_lab stochastic VI toolkit."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
