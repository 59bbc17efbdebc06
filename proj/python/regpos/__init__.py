"""Python bindings for the regpos library."""

from ._regpos import *  # noqa: F401,F403
from ._regpos import __version__  # noqa: F401
