"""Transfer-matrix criticality laboratory: python bindings."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
