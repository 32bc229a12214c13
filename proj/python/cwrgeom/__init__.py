"""Embedding-space geometry analysis and cluster-based isotropy enhancement."""

from ._cwrgeom import *  # noqa: F401,F403
from ._cwrgeom import Error, synth  # noqa: F401

__version__ = "0.1.0"
