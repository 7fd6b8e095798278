"""Collapse schemes, nonlocal measurements and primitive-ontology dynamics on
Minkowski space-time - python bindings over the C++ core."""

try:
    from ._core import *  # noqa: F401,F403
    from . import _core as _impl
except ImportError:  # development layout: extension built by CMake, on sys.path
    from _core import *  # noqa: F401,F403
    import _core as _impl

__doc__ = _impl.__doc__
__all__ = [name for name in dir(_impl) if not name.startswith("_")]
