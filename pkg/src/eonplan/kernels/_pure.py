"""Pure numpy grid-scan kernels; reference implementation for the compiled one."""

from __future__ import annotations

import numpy as np


def first_fit(occ: np.ndarray, links: np.ndarray, width: int) -> int:
    """Lowest start slot of a width-wide window free on every listed link.

    ``occ`` is the (num_links, num_slots) occupancy grid; nonzero means busy.
    Returns -1 when no window fits.
    """
    num_slots = occ.shape[1]
    if width < 1 or width > num_slots:
        return -1
    busy = occ[links].any(axis=0)
    prefix = np.zeros(num_slots + 1, dtype=np.int64)
    np.cumsum(busy, out=prefix[1:])
    busy_per_window = prefix[width:] - prefix[: num_slots - width + 1]
    hits = np.flatnonzero(busy_per_window == 0)
    return int(hits[0]) if hits.size else -1


def window_free(occ: np.ndarray, links: np.ndarray, start: int, width: int) -> bool:
    """True when slots [start, start+width) are free on every listed link."""
    if start < 0 or start + width > occ.shape[1]:
        return False
    return not occ[links, start : start + width].any()
