"""Exact branch-and-bound over per-demand (path, interval, start) choices.

For a fixed choice per demand, every remaining variable of the integer
program is forced to its canonical tight value (see from_assignment), so
searching the choice space is an exhaustive search of the program itself.
Each choice carries a static cost — its disruption, gap, and slot-usage
terms — which is exact because feasible choices never share cells; only the
top-slot term couples demands, and it enters bounds through a running max.

Phase A finds the optimal value with cost-ordered expansion and admissible
lower bounds.  Phase B re-walks the tree in (path, interval, start) order
and returns the first assignment matching that value, making the reported
solution the lexicographically smallest optimum, independent of search
order.  Float tolerances of 1e-12 guard both phases' comparisons.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .. import kernels
from .instance import IlpInstance
from .solution import IlpSolution, from_assignment, objective_value

__all__ = ["SolverReport", "solve_exact"]

EPS = 1e-12
_TIME_CHECK_MASK = 0xFFF


@dataclass
class SolverReport:
    status: str  # "optimal" | "infeasible" | "timed_out"
    objective: float | None
    nodes_explored: int
    wall_time_s: float


class _Timeout(Exception):
    pass


@dataclass(frozen=True)
class _Choice:
    static: float
    top: int
    p: int
    i: int
    s: int
    width: int
    links: np.ndarray


def _build_choices(instance: IlpInstance) -> list[list[_Choice]] | None:
    """Per-demand choice tables in lexicographic order, or None if some
    demand cannot fit anywhere even on an empty grid."""
    C = instance.num_demands
    F = instance.num_slots
    w1, w2, w3, w4, _w5 = instance.weights
    per_demand_w1 = w1 / C
    gap_denom = 1.0 + instance.range_spread
    usage_denom = instance.num_links * instance.num_slots
    tables: list[list[_Choice]] = []
    for demand in instance.demands:
        link_arrays = [
            np.asarray(path.links, dtype=np.int64) for path in demand.paths
        ]
        choices: list[_Choice] = []
        for p in range(len(demand.paths)):
            rho_max = int(demand.rho[p].max())
            rho_min = int(demand.rho[p].min())
            n_links = len(demand.paths[p].links)
            for i in range(instance.horizon):
                width = int(demand.rho[p, i])
                if width > F:
                    continue
                z = rho_max - width
                v = width - rho_min
                base = (
                    w2 / gap_denom * z
                    + w3 / gap_denom * v
                    + w4 / usage_denom * (width * n_links)
                )
                for s in range(F - width + 1):
                    y = 0 if demand.prev_covers(p, s) else 1
                    choices.append(
                        _Choice(
                            static=per_demand_w1 * y + base,
                            top=s + width,
                            p=p,
                            i=i,
                            s=s,
                            width=width,
                            links=link_arrays[p],
                        )
                    )
        if not choices:
            return None
        tables.append(choices)
    return tables


def solve_exact(
    instance: IlpInstance, time_limit_s: float | None = None
) -> tuple[IlpSolution | None, SolverReport]:
    """Optimal solution and report; deterministic for a given instance.

    Returns status "infeasible" with no solution when demands cannot all be
    placed.  On timeout the incumbent (if any) comes back with status
    "timed_out"; a timeout during the canonicalization phase returns the
    proven-optimal incumbent with status "optimal", since only the
    tie-break, not the value, is then best-effort.
    """
    t0 = time.monotonic()
    deadline = None if time_limit_s is None else t0 + time_limit_s
    C = instance.num_demands
    if C == 0:
        sol = from_assignment(instance, ())
        return sol, SolverReport("optimal", 0.0, 0, time.monotonic() - t0)

    lex_tables = _build_choices(instance)
    if lex_tables is None:
        return None, SolverReport("infeasible", None, 0, time.monotonic() - t0)
    value_tables = [
        sorted(t, key=lambda ch: (ch.static, ch.top, ch.p, ch.i, ch.s))
        for t in lex_tables
    ]

    w5 = instance.weights[4]
    w5f = w5 / instance.num_slots
    # Admissible tails: cheapest static completion and the unavoidable top.
    suffix_static = [0.0] * (C + 1)
    suffix_top = [0] * (C + 1)
    for d in range(C - 1, -1, -1):
        suffix_static[d] = suffix_static[d + 1] + min(
            ch.static for ch in lex_tables[d]
        )
        suffix_top[d] = max(suffix_top[d + 1], min(ch.top for ch in lex_tables[d]))

    grid = np.zeros((instance.num_links, instance.num_slots), dtype=np.uint8)
    stack: list[tuple[int, int, int]] = [(0, 0, 0)] * C
    nodes = 0
    best_cost = float("inf")
    best_assign: tuple[tuple[int, int, int], ...] | None = None

    def tick() -> None:
        nonlocal nodes
        nodes += 1
        if deadline is not None and (nodes & _TIME_CHECK_MASK) == 0:
            if time.monotonic() > deadline:
                raise _Timeout

    def dfs_value(d: int, acc: float, cur_top: int) -> None:
        nonlocal best_cost, best_assign
        tick()
        if d == C:
            total = acc + w5f * cur_top
            if total < best_cost - EPS:
                best_cost = total
                best_assign = tuple(stack)
            return
        tail_static = suffix_static[d + 1]
        tail_top = suffix_top[d + 1]
        floor_top = cur_top if cur_top > tail_top else tail_top
        for ch in value_tables[d]:
            partial = acc + ch.static + tail_static
            if partial + w5f * floor_top >= best_cost - EPS:
                break  # statics are sorted: no later sibling can improve
            child_top = ch.top if ch.top > cur_top else cur_top
            bound_top = child_top if child_top > tail_top else tail_top
            if partial + w5f * bound_top >= best_cost - EPS:
                continue
            if not kernels.window_free(grid, ch.links, ch.s, ch.width):
                continue
            grid[ch.links, ch.s : ch.s + ch.width] += 1
            stack[d] = (ch.p, ch.i, ch.s)
            dfs_value(d + 1, acc + ch.static, child_top)
            grid[ch.links, ch.s : ch.s + ch.width] -= 1

    def dfs_lex(d: int, acc: float, cur_top: int) -> bool:
        tick()
        if d == C:
            return acc + w5f * cur_top <= best_cost + EPS
        tail_static = suffix_static[d + 1]
        tail_top = suffix_top[d + 1]
        for ch in lex_tables[d]:
            child_top = ch.top if ch.top > cur_top else cur_top
            bound_top = child_top if child_top > tail_top else tail_top
            if acc + ch.static + tail_static + w5f * bound_top > best_cost + EPS:
                continue
            if not kernels.window_free(grid, ch.links, ch.s, ch.width):
                continue
            grid[ch.links, ch.s : ch.s + ch.width] += 1
            stack[d] = (ch.p, ch.i, ch.s)
            if dfs_lex(d + 1, acc + ch.static, child_top):
                grid[ch.links, ch.s : ch.s + ch.width] -= 1
                return True
            grid[ch.links, ch.s : ch.s + ch.width] -= 1
        return False

    timed_out = False
    try:
        dfs_value(0, 0.0, 0)
    except _Timeout:
        timed_out = True

    if best_assign is None:
        status = "timed_out" if timed_out else "infeasible"
        return None, SolverReport(status, None, nodes, time.monotonic() - t0)
    if timed_out:
        sol = from_assignment(instance, best_assign)
        return sol, SolverReport(
            "timed_out", objective_value(instance, sol), nodes, time.monotonic() - t0
        )

    canonical = best_assign
    try:
        if dfs_lex(0, 0.0, 0):
            canonical = tuple(stack)
    except _Timeout:
        pass  # value is proven; fall back to the phase-A assignment

    sol = from_assignment(instance, canonical)
    return sol, SolverReport(
        "optimal", objective_value(instance, sol), nodes, time.monotonic() - t0
    )
