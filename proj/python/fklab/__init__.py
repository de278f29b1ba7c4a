"""Python interface to the fklab core library."""

try:
    from fklab._core import *  # noqa: F401,F403
    from fklab import _core as core
except ImportError:  # built in-tree without installing the package
    import _core as core  # noqa: F401
    from _core import *  # noqa: F401,F403

__version__ = core.__version__
ESTIMATOR_STREAMS = core.ESTIMATOR_STREAMS
MAX_ORACLE_EDGES = core.MAX_ORACLE_EDGES
MAX_ORACLE_SPINS = core.MAX_ORACLE_SPINS

__all__ = [name for name in dir(core) if not name.startswith("_")]
