"""B-semismooth Newton solver for weighted-l1 penalized minimization."""

try:
    from bssn._core import *  # noqa: F401,F403  (installed package layout)
    from bssn._core import __doc__  # noqa: F401
except ImportError:  # build-tree layout: _core sits on sys.path directly
    from _core import *  # noqa: F401,F403
    from _core import __doc__  # noqa: F401
