"""Backend selection for the best-response solver.

The compiled extension is used when it was built; otherwise, or when the
environment variable ``HARSHNET_PURE_PYTHON`` is set to a non-empty value
other than ``0``, the pure-Python twin is used.
"""

from __future__ import annotations

import os

from . import _sweep

try:
    from . import _csweep
except ImportError:  # extension not built
    _csweep = None

_BACKENDS = {"python": _sweep.solve}
if _csweep is not None:
    _BACKENDS["cython"] = _csweep.solve


def _default() -> str:
    forced = os.environ.get("HARSHNET_PURE_PYTHON", "")
    if forced not in ("", "0") or "cython" not in _BACKENDS:
        return "python"
    return "cython"


BACKEND = _default()


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def get_solver(name: str | None = None):
    name = name or BACKEND
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {available_backends()}") from None


def solve(*args, backend: str | None = None):
    return get_solver(backend)(*args)
