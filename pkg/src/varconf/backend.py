"""SAT core selection.

The compiled :mod:`varconf._core` is used when it was built; otherwise the
pure-Python :mod:`varconf._pycore` is used.  Setting ``VARCONF_PURE_PYTHON=1``
forces the fallback.
"""

import os

from varconf import _pycore

try:
    if os.environ.get("VARCONF_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure Python requested")
    from varconf import _core
except ImportError:
    _core = None

if _core is not None:
    SatCore = _core.SatCore
    BACKEND = "compiled"
else:
    SatCore = _pycore.SatCore
    BACKEND = "python"


def available_backends():
    """Name -> SatCore class for every back-end importable in this process."""
    out = {"python": _pycore.SatCore}
    if _core is not None:
        out["compiled"] = _core.SatCore
    return out
