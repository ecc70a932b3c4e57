"""Kernel backend selection.

The compiled Cython kernel is preferred; the NumPy fallback kicks in when the
extension is missing (pure-Python install). Set DIRAD_BACKEND=python or
DIRAD_BACKEND=cython to force a choice. Both backends produce bit-identical
output; benchmarks/bench_kernels.py compares their speed.
"""

import os

_forced = os.environ.get("DIRAD_BACKEND", "").strip().lower()
if _forced not in ("", "python", "cython"):
    raise ImportError(f"unsupported DIRAD_BACKEND value: {_forced!r}")

if _forced == "python":
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        if _forced == "cython":
            raise
        from . import _kernels_py as _impl  # type: ignore[no-redef]

pairwise = _impl.pairwise
BACKEND: str = _impl.BACKEND


def backend_name() -> str:
    """Active kernel backend: "cython" or "python"."""
    return BACKEND
