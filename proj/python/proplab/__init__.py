"""Python bindings for the proplab community-selection model."""

from ._proplab import *  # noqa: F401,F403
from ._proplab import __doc__  # noqa: F401
