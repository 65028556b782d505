"""Lane-free highway traffic simulation with MCTS planning."""

try:
    from ._core import *  # noqa: F401,F403
    from . import _core  # noqa: F401
except ImportError:  # pragma: no cover - build-tree layout
    from _core import *  # noqa: F401,F403
    import _core  # noqa: F401
