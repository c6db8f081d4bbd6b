"""Discrete complex Monge-Ampere equation on a truncated domain."""

from .analysis import *  # noqa: F401,F403
from .continuity import *  # noqa: F401,F403
from .grid import *  # noqa: F401,F403
from .operator import *  # noqa: F401,F403
