"""Kernel backend selection.

The compiled extension is preferred; set ``MATCHGAP_PURE=1`` to force the
numpy fallback.
"""
from __future__ import annotations

import os

from . import _fallback

if os.environ.get("MATCHGAP_PURE"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

sample_block = _impl.sample_block
hopcroft_karp = _impl.hopcroft_karp
transport_ssp = _impl.transport_ssp


def available_backends() -> dict:
    out = {"python": _fallback}
    try:
        from . import _kernels  # type: ignore[attr-defined]

        out["compiled"] = _kernels
    except ImportError:
        pass
    return out
