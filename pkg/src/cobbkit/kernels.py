"""Backend selection for the hot kernels.

The COBBKIT_BACKEND environment variable picks the implementation:

  auto   use the JIT (numba) kernels when numba imports, else pure numpy
  numba  require the JIT kernels
  numpy  force the pure-numpy fallbacks

Both backends implement identical contracts; see benchmarks/backend_bench.py
for a speed comparison.
"""

from __future__ import annotations

import os
import warnings
from types import ModuleType

from . import _kernels_numpy

_BACKENDS: dict[str, ModuleType] = {}


def _load_numba_backend() -> ModuleType:
    from . import _kernels_numba

    return _kernels_numba


def active_backend() -> str:
    """Resolve the backend name from COBBKIT_BACKEND (auto/numba/numpy)."""
    choice = os.environ.get("COBBKIT_BACKEND", "auto").strip().lower()
    if choice in ("", "auto"):
        try:
            get_backend("numba")
            return "numba"
        except ImportError:
            warnings.warn("numba unavailable, using pure-numpy kernels")
            return "numpy"
    if choice not in ("numba", "numpy"):
        raise ValueError(f"COBBKIT_BACKEND must be auto, numba or numpy, got {choice!r}")
    return choice


def get_backend(name: str | None = None) -> ModuleType:
    """Return the kernel module for `name` (default: the active backend)."""
    if name is None:
        name = active_backend()
    if name not in _BACKENDS:
        _BACKENDS[name] = _load_numba_backend() if name == "numba" else _kernels_numpy
    return _BACKENDS[name]
