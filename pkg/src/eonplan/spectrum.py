"""Spectrum grid state: allocations, first-fit placement, provisioning actions.

Every allocation is one contiguous slot block replicated on every link of its
path, so slot contiguity and continuity hold by construction; the state only
has to defend non-overlap and bounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels
from .topology import CandidatePath

__all__ = [
    "ActionKind",
    "ActionOutcome",
    "Allocation",
    "NetworkState",
    "first_fit_place",
    "plan_action",
    "is_disruption",
    "validate",
    "dump_state",
]


class ActionKind(Enum):
    PLACED = "placed"  # first placement; no previous allocation existed
    UNCHANGED = "unchanged"
    REDUCED = "reduced"
    EXPANDED = "expanded"
    REALLOCATED = "reallocated"
    BLOCKED = "blocked"


@dataclass(frozen=True)
class Allocation:
    conn: int
    path: CandidatePath
    start: int
    width: int

    @property
    def end(self) -> int:
        """One past the highest slot, i.e. the block is [start, end)."""
        return self.start + self.width

    def covers(self, slot: int) -> bool:
        return self.start <= slot < self.end


@dataclass(frozen=True)
class ActionOutcome:
    kind: ActionKind
    old: Allocation | None
    new: Allocation | None


class NetworkState:
    """Occupancy grid over (link, slot) plus the allocation table behind it."""

    def __init__(self, num_links: int, num_slots: int):
        if num_links < 1 or num_slots < 1:
            raise ValueError("state needs at least one link and one slot")
        self.num_links = num_links
        self.num_slots = num_slots
        self.occupancy = np.zeros((num_links, num_slots), dtype=np.uint8)
        self.allocations: dict[int, Allocation] = {}
        self._link_cache: dict[tuple[int, ...], np.ndarray] = {}

    def link_array(self, links: tuple[int, ...]) -> np.ndarray:
        arr = self._link_cache.get(links)
        if arr is None:
            arr = np.asarray(links, dtype=np.int64)
            self._link_cache[links] = arr
        return arr

    def allocation(self, conn: int) -> Allocation | None:
        return self.allocations.get(conn)

    def place(self, alloc: Allocation) -> None:
        """Record an allocation; the caller guarantees the window is free."""
        if alloc.conn in self.allocations:
            raise ValueError(f"connection {alloc.conn} already allocated")
        if alloc.width < 1 or alloc.start < 0 or alloc.end > self.num_slots:
            raise ValueError(f"allocation out of bounds: {alloc}")
        links = self.link_array(alloc.path.links)
        self.occupancy[links, alloc.start : alloc.end] += 1
        self.allocations[alloc.conn] = alloc

    def release(self, conn: int) -> Allocation:
        alloc = self.allocations.pop(conn)
        links = self.link_array(alloc.path.links)
        self.occupancy[links, alloc.start : alloc.end] -= 1
        return alloc

    def occupied_cells(self) -> int:
        """Total busy (link, slot) cells."""
        return int(np.count_nonzero(self.occupancy))

    def max_slot_id(self) -> int:
        """Highest occupied slot as a 1-based id; 0 on an empty grid."""
        cols = self.occupancy.any(axis=0)
        hits = np.flatnonzero(cols)
        return int(hits[-1]) + 1 if hits.size else 0

    def snapshot(self) -> dict[int, Allocation]:
        return dict(self.allocations)


def first_fit_place(state: NetworkState, path: CandidatePath, width: int) -> int | None:
    """Lowest start where ``width`` contiguous slots are free on every link."""
    if width < 1:
        raise ValueError(f"width must be >= 1: {width}")
    start = kernels.first_fit(state.occupancy, state.link_array(path.links), width)
    return None if start < 0 else start


def _window_free(state: NetworkState, path: CandidatePath, start: int, width: int) -> bool:
    return kernels.window_free(
        state.occupancy, state.link_array(path.links), start, width
    )


def _place_first_fit_any(
    state: NetworkState,
    conn: int,
    candidates: list[CandidatePath],
    widths: list[int],
) -> Allocation | None:
    for path, width in zip(candidates, widths):
        if width > state.num_slots:
            continue
        start = first_fit_place(state, path, width)
        if start is not None:
            alloc = Allocation(conn, path, start, width)
            state.place(alloc)
            return alloc
    return None


def plan_action(
    state: NetworkState,
    conn: int,
    candidates: list[CandidatePath],
    widths: list[int],
) -> ActionOutcome:
    """Fit ``conn`` to its new width, disturbing as little as possible.

    Cascade: keep the current block when the width on the current path is
    unchanged; shrink in place (start kept) when it drops; extend upward in
    place when it grows and the extension slots are free.  Otherwise release
    the block and fall back to first-fit over all candidate paths in order —
    a re-allocation.  A connection that fits nowhere ends up Blocked with
    nothing held.

    ``widths`` runs parallel to ``candidates`` (each path has its own
    modulation, hence its own width).  Widths must be >= 1.
    """
    if len(candidates) != len(widths):
        raise ValueError("candidates and widths differ in length")
    if not candidates:
        raise ValueError(f"connection {conn} has no candidate paths")
    if any(w < 1 for w in widths):
        raise ValueError(f"widths must be >= 1: {widths}")

    old = state.allocation(conn)
    if old is None:
        new = _place_first_fit_any(state, conn, candidates, widths)
        if new is None:
            return ActionOutcome(ActionKind.BLOCKED, None, None)
        return ActionOutcome(ActionKind.PLACED, None, new)

    try:
        cur_pos = candidates.index(old.path)
    except ValueError:
        raise ValueError(
            f"connection {conn}: current path is not among its candidates"
        ) from None
    want = widths[cur_pos]

    if want == old.width:
        return ActionOutcome(ActionKind.UNCHANGED, old, old)

    if want < old.width:
        state.release(conn)
        new = Allocation(conn, old.path, old.start, want)
        state.place(new)
        return ActionOutcome(ActionKind.REDUCED, old, new)

    # Growth: try the in-place upward extension first.
    if old.start + want <= state.num_slots and _window_free(
        state, old.path, old.end, want - old.width
    ):
        state.release(conn)
        new = Allocation(conn, old.path, old.start, want)
        state.place(new)
        return ActionOutcome(ActionKind.EXPANDED, old, new)

    state.release(conn)
    new = _place_first_fit_any(state, conn, candidates, widths)
    if new is None:
        return ActionOutcome(ActionKind.BLOCKED, old, None)
    return ActionOutcome(ActionKind.REALLOCATED, old, new)


def is_disruption(old: Allocation | None, new: Allocation | None) -> bool:
    """True when an existing connection moved: path changed or start moved."""
    if old is None or new is None:
        return False
    return old.path != new.path or old.start != new.start


def validate(state: NetworkState) -> list[str]:
    """All state invariant violations, empty when the state is sound.

    Checks allocation bounds and widths, per-(link, slot) non-overlap, and
    that the occupancy grid matches the allocation table exactly.  Contiguity
    and path continuity need no check: an Allocation can only express one
    contiguous block shared by every link of its path.
    """
    problems: list[str] = []
    coverage = np.zeros_like(state.occupancy, dtype=np.int64)
    for conn, alloc in state.allocations.items():
        if alloc.conn != conn:
            problems.append(f"conn {conn}: table key mismatches allocation {alloc.conn}")
        if alloc.width < 1:
            problems.append(f"conn {conn}: width {alloc.width} < 1")
            continue
        if alloc.start < 0 or alloc.end > state.num_slots:
            problems.append(
                f"conn {conn}: block [{alloc.start}, {alloc.end}) out of bounds"
            )
            continue
        links = state.link_array(alloc.path.links)
        coverage[links, alloc.start : alloc.end] += 1
    overlap = np.argwhere(coverage > 1)
    for link, slot in overlap:
        problems.append(f"link {int(link)} slot {int(slot)}: claimed more than once")
    mismatch = np.argwhere((coverage > 0).astype(np.uint8) != (state.occupancy > 0))
    for link, slot in mismatch:
        problems.append(
            f"link {int(link)} slot {int(slot)}: grid disagrees with allocations"
        )
    return problems


def dump_state(state: NetworkState) -> str:
    """Text rendering: one '#'/'.' row per link, then the allocation table.

    Table rows are ``conn,path_index,start,width`` with 0-based starts, one
    per allocation sorted by connection id.
    """
    lines = []
    for link in range(state.num_links):
        row = state.occupancy[link]
        lines.append(
            f"link {link:3d} |" + "".join("#" if v else "." for v in row) + "|"
        )
    lines.append("conn,path_index,start,width")
    for conn in sorted(state.allocations):
        a = state.allocations[conn]
        lines.append(f"{conn},{a.path.path_index},{a.start},{a.width}")
    return "\n".join(lines)
