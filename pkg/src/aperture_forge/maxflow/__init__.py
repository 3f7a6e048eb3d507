"""Min-cut / max-flow solver with a compiled core and a pure-Python fallback.

The compiled extension ``_bk_cy`` is preferred when importable; otherwise
(or when ``APERTURE_FORGE_PURE_PYTHON=1`` is set) the pure-Python twin
``_bk_py`` is used. Both implement the same algorithm over the same data
layout and return identical cuts, so the choice only affects speed.
"""

import os

from . import _bk_py

if os.environ.get("APERTURE_FORGE_PURE_PYTHON", "") == "1":
    _impl = _bk_py
else:
    try:
        from . import _bk_cy as _impl
    except ImportError:
        _impl = _bk_py

max_flow = _impl.max_flow


def backend_name() -> str:
    """'compiled' when the Cython core is active, else 'python'."""
    return "compiled" if _impl.__name__.endswith("_bk_cy") else "python"
