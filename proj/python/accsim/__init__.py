"""Decentralized optimization simulator with an accelerated SONATA outer loop."""

from ._core import *  # noqa: F401,F403
from ._core import AccsimError, __doc__  # noqa: F401
