"""Pick the compiled kernel when it was built, else the Python loop.

Setting ``QUAKECTL_PURE_PYTHON=1`` forces the Python implementation.
"""

import os

from . import _kernel_py


def _load():
    backends = {"python": _kernel_py}
    try:
        from . import _kernel
    except ImportError:
        pass
    else:
        backends["cython"] = _kernel
    return backends


BACKENDS = _load()
if os.environ.get("QUAKECTL_PURE_PYTHON", "").strip() not in ("", "0"):
    DEFAULT = "python"
else:
    DEFAULT = "cython" if "cython" in BACKENDS else "python"


def get(name=None):
    name = name or DEFAULT
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} not available; have {tuple(BACKENDS)}") from None
