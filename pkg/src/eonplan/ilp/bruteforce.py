"""Exhaustive reference solver for small instances.

Enumerates the full cross product of per-demand (path, interval, start)
choices in lexicographic order, keeps the first assignment attaining the
minimum, and scores leaves with the same canonical arithmetic the rest of
the package uses.  Useful only for tiny instances; the point is having a
search-free answer to compare the branch-and-bound solver against.
"""

from __future__ import annotations

import itertools
import math

from .instance import IlpInstance
from .solution import IlpSolution, from_assignment

__all__ = ["brute_force"]


def brute_force(
    instance: IlpInstance, max_leaves: int = 10_000_000
) -> tuple[IlpSolution | None, float | None]:
    """Optimal (solution, objective) by enumeration, or (None, None).

    Raises ValueError when the cross product exceeds ``max_leaves``.
    """
    C = instance.num_demands
    if C == 0:
        return from_assignment(instance, ()), 0.0
    F = instance.num_slots
    w1, w2, w3, w4, w5 = instance.weights
    gap_denom = 1.0 + instance.range_spread
    usage_denom = instance.num_links * instance.num_slots

    per_demand: list[list[tuple[int, int, int, int, int, int, tuple[int, ...]]]] = []
    for demand in instance.demands:
        options = []
        for p, path in enumerate(demand.paths):
            rho_max = int(demand.rho[p].max())
            for i in range(instance.horizon):
                width = int(demand.rho[p, i])
                if width > F:
                    continue
                for s in range(F - width + 1):
                    y = 0 if demand.prev_covers(p, s) else 1
                    options.append((p, i, s, width, y, rho_max - width, path.links))
        per_demand.append(options)
    if any(not options for options in per_demand):
        return None, None
    leaves = math.prod(len(options) for options in per_demand)
    if leaves > max_leaves:
        raise ValueError(f"{leaves} leaves exceed the {max_leaves} enumeration cap")

    best_obj: float | None = None
    best_assign: tuple[tuple[int, int, int], ...] | None = None
    for combo in itertools.product(*per_demand):
        cells: set[tuple[int, int]] = set()
        ok = True
        sum_y = sum_z = sum_v = 0
        f_max = 0
        for d, (p, i, s, width, y, z, links) in enumerate(combo):
            demand = instance.demands[d]
            for link in links:
                for f in range(s, s + width):
                    if (link, f) in cells:
                        ok = False
                        break
                    cells.add((link, f))
                if not ok:
                    break
            if not ok:
                break
            sum_y += y
            sum_z += z
            sum_v += width - int(demand.rho[p].min())
            f_max = max(f_max, s + width)
        if not ok:
            continue
        obj = (
            w1 / C * sum_y
            + w2 / gap_denom * sum_z
            + w3 / gap_denom * sum_v
            + w4 / usage_denom * len(cells)
            + w5 / F * f_max
        )
        if best_obj is None or obj < best_obj:
            best_obj = obj
            best_assign = tuple((p, i, s) for (p, i, s, *_rest) in combo)
    if best_assign is None:
        return None, None
    return from_assignment(instance, best_assign), best_obj
