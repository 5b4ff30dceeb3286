"""Pick the compiled kernels when they import, otherwise the numpy twins.

Set ``REACTMIX_PURE_PYTHON=1`` to force the numpy path.
"""

import importlib
import os

_FORCE_PY = os.environ.get("REACTMIX_PURE_PYTHON", "") not in ("", "0")


def load(name):
    """Return the kernel module called ``name`` ("cython" or "python")."""
    if name == "cython":
        return importlib.import_module("reactmix._kernels")
    if name == "python":
        return importlib.import_module("reactmix._kernels_py")
    raise ValueError(f"unknown backend {name!r}; expected 'cython' or 'python'")


def available():
    """Names of the backends that import on this machine."""
    names = []
    for name in ("cython", "python"):
        try:
            load(name)
        except ImportError:
            continue
        names.append(name)
    return names


if _FORCE_PY:
    kernels = load("python")
    BACKEND = "python"
else:
    try:
        kernels = load("cython")
        BACKEND = "cython"
    except ImportError:
        kernels = load("python")
        BACKEND = "python"
