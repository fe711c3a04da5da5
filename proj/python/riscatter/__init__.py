"""RIS rich-scattering channel simulator.

Thin wrapper over the compiled core. In an installed wheel the extension
lives inside this package; in a plain CMake build it sits on sys.path as a
top-level module.
"""

try:
    from ._riscatter import *  # noqa: F401,F403
    from . import _riscatter as _core
except ImportError:
    from _riscatter import *  # noqa: F401,F403
    import _riscatter as _core

__version__ = "0.1.0"
__all__ = [name for name in dir(_core) if not name.startswith("_")]
