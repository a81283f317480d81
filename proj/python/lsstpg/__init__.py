"""Python bindings for the lsst-pg harvest planner."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
