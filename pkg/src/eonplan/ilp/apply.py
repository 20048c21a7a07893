"""Turn a solved instance into provisioning actions on live state."""

from __future__ import annotations

from dataclasses import dataclass

from ..spectrum import ActionKind, ActionOutcome, Allocation, NetworkState
from .instance import IlpInstance
from .solution import IlpSolution, check_solution

__all__ = ["ApplyReport", "apply_solution"]


@dataclass(frozen=True)
class ApplyReport:
    outcomes: dict[int, ActionOutcome]
    disruption_sum: int  # sum of the solution's Y flags


def apply_solution(
    state: NetworkState, instance: IlpInstance, solution: IlpSolution
) -> ApplyReport:
    """Replace the instance demands' allocations with the solution's blocks.

    The solution is re-checked first and an invalid one aborts before any
    state change.  Outcomes are classified geometrically against each
    demand's previous block (placed / unchanged / reduced / expanded /
    reallocated), matching the vocabulary of the heuristic engine.
    """
    problems = check_solution(instance, solution)
    if problems:
        raise ValueError(
            f"refusing to apply an invalid solution ({len(problems)} problems; "
            f"first: {problems[0]})"
        )
    if solution.assignment is None:
        raise ValueError("solution carries no per-demand assignment")

    outcomes: dict[int, ActionOutcome] = {}
    olds: dict[int, Allocation | None] = {}
    for demand in instance.demands:
        old = state.allocation(demand.conn)
        olds[demand.conn] = old
        if old is not None:
            state.release(demand.conn)
    for demand, (p, i, s) in zip(instance.demands, solution.assignment):
        width = int(demand.rho[p, i])
        new = Allocation(demand.conn, demand.paths[p], s, width)
        state.place(new)
        old = olds[demand.conn]
        if old is None:
            kind = ActionKind.PLACED
        elif old.path == new.path and old.start == new.start:
            if new.width == old.width:
                kind = ActionKind.UNCHANGED
            elif new.width < old.width:
                kind = ActionKind.REDUCED
            else:
                kind = ActionKind.EXPANDED
        else:
            kind = ActionKind.REALLOCATED
        outcomes[demand.conn] = ActionOutcome(kind, old, new)
    return ApplyReport(outcomes=outcomes, disruption_sum=int(solution.Y.sum()))
