"""Python bindings for the distributed Fenchel dual gradient simulator."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401
