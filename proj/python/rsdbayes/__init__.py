"""Bayesian daily response-propensity prediction for responsive survey designs.

Thin re-export of the compiled core; see the README for the CLI and file
formats.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
