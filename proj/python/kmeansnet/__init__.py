"""Softmax-assignment clustering trained by stochastic gradient methods,
with a Lloyd's-algorithm baseline, clustering metrics, and convergence
diagnostics. Thin wrapper over the compiled extension."""

from ._kmeansnet import *  # noqa: F401,F403
from ._kmeansnet import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
