"""Kernel backend selection.

The compiled extension ``bellperm._kernels`` is used when it imports; the
numpy implementation in ``bellperm._pykernels`` is the fallback. Set
``BELLPERM_PURE_PYTHON=1`` to force the fallback.
"""

import importlib
import os

from . import _pykernels

if os.environ.get("BELLPERM_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

run_trajectories = _impl.run_trajectories
apply_gate_words = _impl.apply_gate_words
apply_gates_words = _impl.apply_gates_words


def available_backends() -> list[str]:
    names = ["python"]
    try:
        importlib.import_module("bellperm._kernels")
        names.insert(0, "cython")
    except ImportError:
        pass
    return names


def get_backend(name: str):
    """Kernel module by name: ``"cython"`` or ``"python"``."""
    if name == "python":
        return _pykernels
    if name == "cython":
        return importlib.import_module("bellperm._kernels")
    raise ValueError(f"unknown kernel backend {name!r}")


def default_backend():
    """The kernel module selected at import."""
    return _impl
