"""Problem instance for the exact planner: demands, paths, slot requirements."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..spectrum import NetworkState
from ..topology import CandidatePath, fs_required
from ..traffic import PredictionMatrix

__all__ = [
    "SC1_WEIGHTS",
    "SC2_WEIGHTS",
    "BuildError",
    "DemandData",
    "IlpInstance",
    "build_instance",
]

# Weight presets: both put disruptions first; SC1 then leans on the
# under-provisioning spread, SC2 on the over-provisioning spread.
SC1_WEIGHTS: tuple[float, float, float, float, float] = (20.0, 20.0, 1.0, 0.01, 10.0)
SC2_WEIGHTS: tuple[float, float, float, float, float] = (20.0, 2.0, 5.0, 0.01, 10.0)


class BuildError(ValueError):
    """The prediction matrix and network data cannot form a valid instance."""


@dataclass(frozen=True, eq=False)
class DemandData:
    """One connection's candidate paths, slot needs, and previous block.

    ``rho[p, i]`` is the slot count needed on path p if interval i's
    prediction is provisioned (always >= 1: a served connection holds
    spectrum even for a zero-rate prediction).  ``prev_*`` describe the
    block held entering this epoch, or are None for a new connection.
    """

    conn: int
    paths: tuple[CandidatePath, ...]
    rho: np.ndarray
    prev_path_pos: int | None = None
    prev_start: int | None = None
    prev_width: int | None = None

    @property
    def has_prev(self) -> bool:
        return self.prev_path_pos is not None

    def spread(self) -> int:
        """Max over paths of (max - min) slot requirement across intervals."""
        return int((self.rho.max(axis=1) - self.rho.min(axis=1)).max())

    def prev_covers(self, path_pos: int, start: int) -> bool:
        """True when (path_pos, start) lands inside the previous block."""
        return (
            self.has_prev
            and path_pos == self.prev_path_pos
            and self.prev_start <= start < self.prev_start + self.prev_width
        )


@dataclass(frozen=True, eq=False)
class IlpInstance:
    num_links: int
    num_slots: int
    horizon: int
    weights: tuple[float, float, float, float, float]
    demands: tuple[DemandData, ...]

    @property
    def num_demands(self) -> int:
        return len(self.demands)

    @cached_property
    def range_spread(self) -> int:
        """Sum over connections of the slot-requirement spread.

        Normalizes the under/over terms of the objective; the +1 in the
        denominator guards the all-flat case.
        """
        return sum(d.spread() for d in self.demands)

    @cached_property
    def num_variables(self) -> int:
        paths = sum(len(d.paths) for d in self.demands)
        paths_slots = sum(len(d.paths) for d in self.demands) * self.num_slots
        paths_steps = sum(len(d.paths) for d in self.demands) * self.horizon
        return (
            paths_steps  # q: choice of (path, interval)
            + 2 * paths_slots  # W occupancy and psi block-start indicators
            + paths  # R path indicators
            + 3 * self.num_demands  # Y, Z, V
            + self.num_links * self.num_slots  # X
            + 1  # F_max
        )

    @cached_property
    def num_constraints(self) -> int:
        paths = sum(len(d.paths) for d in self.demands)
        return (
            3 * self.num_demands  # one choice, single block, disruption flag
            + 2 * paths  # path indicator, width
            + paths * self.num_slots  # block-start lower bounds
            + 2 * self.num_links * self.num_slots  # overlap, top slot
            + 2 * paths * self.horizon  # under and over gaps
        )


def build_instance(
    state: NetworkState,
    pred: PredictionMatrix,
    candidates: dict[int, list[CandidatePath]],
    weights: tuple[float, float, float, float, float],
    baud_gbaud: float,
) -> IlpInstance:
    """Assemble the instance for one planning epoch from live state.

    Every predicted connection needs at least one candidate path; its current
    allocation (if any) must sit on one of them.  Grid geometry is taken from
    ``state``.
    """
    if len(weights) != 5:
        raise BuildError(f"expected 5 weights, got {len(weights)}")
    if any(w < 0 for w in weights):
        raise BuildError(f"weights must be non-negative: {weights}")
    if not pred.rates:
        raise BuildError("empty prediction matrix")
    demands: list[DemandData] = []
    for conn in pred.connections():
        paths = tuple(candidates.get(conn) or ())
        if not paths:
            raise BuildError(f"connection {conn} has no candidate paths")
        rates = pred.rates[conn]
        rho = np.empty((len(paths), pred.horizon), dtype=np.int64)
        for p, path in enumerate(paths):
            for i, rate in enumerate(rates):
                rho[p, i] = max(1, fs_required(rate, baud_gbaud, path.modulation))
        if rho.max() > state.num_slots:
            # Oversized requirements stay in the instance; the solver simply
            # has no placement for them and reports infeasibility, which the
            # planner's blocking fallback then resolves.
            pass
        prev = state.allocation(conn)
        if prev is None:
            demands.append(DemandData(conn=conn, paths=paths, rho=rho))
        else:
            try:
                pos = paths.index(prev.path)
            except ValueError:
                raise BuildError(
                    f"connection {conn}: held path is not among its candidates"
                ) from None
            demands.append(
                DemandData(
                    conn=conn,
                    paths=paths,
                    rho=rho,
                    prev_path_pos=pos,
                    prev_start=prev.start,
                    prev_width=prev.width,
                )
            )
    return IlpInstance(
        num_links=state.num_links,
        num_slots=state.num_slots,
        horizon=pred.horizon,
        weights=tuple(float(w) for w in weights),
        demands=tuple(demands),
    )
