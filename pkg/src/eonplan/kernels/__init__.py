"""Grid-scan kernels with a compiled fast path.

The Cython extension is used when it built successfully; the numpy fallback
is selected otherwise, or when EONPLAN_KERNELS=pure is set.  Both expose the
same two functions and return identical results.
"""

from __future__ import annotations

import os

from . import _pure

_IMPL = _pure
_BACKEND = "pure"

if os.environ.get("EONPLAN_KERNELS", "").lower() != "pure":
    try:
        from . import _fast  # type: ignore[attr-defined]

        _IMPL = _fast
        _BACKEND = "compiled"
    except ImportError:
        pass


def backend_name() -> str:
    """Which implementation import-time selection picked."""
    return _BACKEND


def available_backends() -> dict[str, object]:
    """All importable backends, keyed by name (for tests and benchmarks)."""
    out: dict[str, object] = {"pure": _pure}
    try:
        from . import _fast  # type: ignore[attr-defined]

        out["compiled"] = _fast
    except ImportError:
        pass
    return out


def first_fit(occ, links, width: int) -> int:
    """Lowest start of a free width-wide window across the links, else -1."""
    return _IMPL.first_fit(occ, links, int(width))


def window_free(occ, links, start: int, width: int) -> bool:
    """True when [start, start+width) is free on every listed link."""
    return bool(_IMPL.window_free(occ, links, int(start), int(width)))
