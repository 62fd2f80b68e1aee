"""Directional M-quantiles and partial effects via influence regression."""

try:
    from ._mqrif import *  # noqa: F401,F403  installed layout
    from . import _mqrif as _core
except ImportError:  # build-tree layout: extension module beside the package
    from _mqrif import *  # noqa: F401,F403
    import _mqrif as _core

__all__ = [name for name in dir(_core) if not name.startswith("_")]
__version__ = "0.1.0"
