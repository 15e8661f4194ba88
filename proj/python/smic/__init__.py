"""Semi-Markov interval censoring toolkit.

Thin wrapper around the native extension; everything of substance lives in
``smic._smic``.
"""

from ._smic import *  # noqa: F401,F403
from ._smic import __version__  # noqa: F401
