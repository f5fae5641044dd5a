"""Integration-backend selection.

The compiled kernel is preferred when its extension module imported
cleanly; the numpy reference is used otherwise.  ``ELEVFORM_BACKEND=python``
forces the fallback (useful for benchmarking and debugging), and a backend
can also be picked per call.
"""

import os

from . import _reference

try:
    from . import _speedups
    HAVE_COMPILED = True
except ImportError:  # pragma: no cover - depends on the build environment
    _speedups = None
    HAVE_COMPILED = False

EULER = _reference.EULER
RK4 = _reference.RK4

_FORCED = os.environ.get("ELEVFORM_BACKEND", "").strip().lower()
if _FORCED and _FORCED not in ("python", "compiled"):
    raise ValueError(f"ELEVFORM_BACKEND must be 'python' or 'compiled', got {_FORCED!r}")
if _FORCED == "compiled" and not HAVE_COMPILED:
    raise ImportError("ELEVFORM_BACKEND=compiled but the extension is not built")

DEFAULT_BACKEND = "compiled" if HAVE_COMPILED and _FORCED != "python" else "python"


def resolve_backend(name=None):
    """Map None/'compiled'/'python' to an integrate() implementation."""
    if name is None:
        name = DEFAULT_BACKEND
    if name == "compiled":
        if not HAVE_COMPILED:
            raise ValueError("compiled backend requested but the extension is not built")
        return _speedups.integrate
    if name == "python":
        return _reference.integrate
    raise ValueError(f"unknown backend {name!r}")


def integrate(*args, backend=None):
    return resolve_backend(backend)(*args)
