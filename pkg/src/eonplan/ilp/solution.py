"""Solution encoding, the canonical objective, and an independent checker."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instance import IlpInstance

__all__ = ["IlpSolution", "from_assignment", "objective_value", "check_solution"]


@dataclass(eq=False)
class IlpSolution:
    """Full variable vectors, per demand, in instance demand order.

    ``assignment`` is the compact (path_pos, interval, start) per demand when
    the solution is in single-block form; hand-built solutions may leave it
    None.  Arrays per demand: q and W/psi are (num_paths, horizon) and
    (num_paths, num_slots); R is (num_paths,).
    """

    q: list[np.ndarray]
    R: list[np.ndarray]
    W: list[np.ndarray]
    psi: list[np.ndarray]
    Y: np.ndarray
    Z: np.ndarray
    V: np.ndarray
    X: np.ndarray
    f_max: int
    assignment: tuple[tuple[int, int, int], ...] | None = None


def from_assignment(
    instance: IlpInstance, assignment: tuple[tuple[int, int, int], ...]
) -> IlpSolution:
    """Expand per-demand (path_pos, interval, start) choices to full vectors.

    All dependent variables take their canonical tight values: W is the
    contiguous block, psi marks its start, Z/V are the exact gaps to the
    extreme slot requirements on the chosen path, X is the recomputed cell
    coverage, and F_max the highest covered 1-based slot id.  The result is
    optimal among all solutions sharing the assignment (every dependent
    variable has non-negative weight and a one-sided constraint).
    """
    if len(assignment) != instance.num_demands:
        raise ValueError(
            f"assignment covers {len(assignment)} of {instance.num_demands} demands"
        )
    C = instance.num_demands
    F = instance.num_slots
    U = instance.horizon
    q: list[np.ndarray] = []
    R: list[np.ndarray] = []
    W: list[np.ndarray] = []
    psi: list[np.ndarray] = []
    Y = np.zeros(C, dtype=np.int64)
    Z = np.zeros(C, dtype=np.int64)
    V = np.zeros(C, dtype=np.int64)
    X = np.zeros((instance.num_links, F), dtype=np.int64)
    f_max = 0
    for d, (demand, (p, i, s)) in enumerate(zip(instance.demands, assignment)):
        P = len(demand.paths)
        if not (0 <= p < P and 0 <= i < U):
            raise ValueError(f"connection {demand.conn}: choice ({p}, {i}) out of range")
        width = int(demand.rho[p, i])
        if not (0 <= s and s + width <= F):
            raise ValueError(
                f"connection {demand.conn}: block [{s}, {s + width}) out of bounds"
            )
        dq = np.zeros((P, U), dtype=np.int64)
        dq[p, i] = 1
        dR = np.zeros(P, dtype=np.int64)
        dR[p] = 1
        dW = np.zeros((P, F), dtype=np.int64)
        dW[p, s : s + width] = 1
        dpsi = np.zeros((P, F), dtype=np.int64)
        dpsi[p, s] = 1
        q.append(dq)
        R.append(dR)
        W.append(dW)
        psi.append(dpsi)
        Y[d] = 0 if demand.prev_covers(p, s) else 1
        Z[d] = int(demand.rho[p].max()) - width
        V[d] = width - int(demand.rho[p].min())
        for link in demand.paths[p].links:
            X[link, s : s + width] += 1
        f_max = max(f_max, s + width)
    X = (X > 0).astype(np.int64)
    return IlpSolution(
        q=q, R=R, W=W, psi=psi, Y=Y, Z=Z, V=V, X=X, f_max=f_max,
        assignment=tuple(assignment),
    )


def objective_value(instance: IlpInstance, sol: IlpSolution) -> float:
    """Weighted, normalized objective.

    Each term is an integer sum scaled by a constant, added in a fixed
    order, so equal integer aggregates always produce bit-identical floats.
    """
    C = instance.num_demands
    if C == 0:
        return 0.0
    w1, w2, w3, w4, w5 = instance.weights
    gap_denom = 1.0 + instance.range_spread
    term_disrupt = w1 / C * int(sol.Y.sum())
    term_under = w2 / gap_denom * int(sol.Z.sum())
    term_over = w3 / gap_denom * int(sol.V.sum())
    term_usage = w4 / (instance.num_links * instance.num_slots) * int(sol.X.sum())
    term_top = w5 / instance.num_slots * int(sol.f_max)
    return term_disrupt + term_under + term_over + term_usage + term_top


def _is_binary(arr: np.ndarray) -> bool:
    return bool(((arr == 0) | (arr == 1)).all())


def check_solution(instance: IlpInstance, sol: IlpSolution) -> list[str]:
    """Every constraint violation in the solution; empty means feasible.

    Written directly against the constraint definitions, independently of
    how solutions are produced, so it can vet solver output, hand-built
    encodings of heuristic states, and externally computed solutions alike.
    """
    problems: list[str] = []
    C = instance.num_demands
    F = instance.num_slots
    U = instance.horizon
    L = instance.num_links

    if len(sol.q) != C or len(sol.R) != C or len(sol.W) != C or len(sol.psi) != C:
        return [f"per-demand arrays do not cover all {C} demands"]
    if sol.Y.shape != (C,) or sol.Z.shape != (C,) or sol.V.shape != (C,):
        return ["Y/Z/V shape mismatch"]
    if sol.X.shape != (L, F):
        return [f"X shape {sol.X.shape} != ({L}, {F})"]

    for d, demand in enumerate(instance.demands):
        c = demand.conn
        P = len(demand.paths)
        q, R, W, psi = sol.q[d], sol.R[d], sol.W[d], sol.psi[d]
        if q.shape != (P, U) or W.shape != (P, F) or psi.shape != (P, F) or R.shape != (P,):
            problems.append(f"conn {c}: array shapes mismatch instance dimensions")
            continue
        for name, arr in (("q", q), ("R", R), ("W", W), ("psi", psi)):
            if not _is_binary(arr):
                problems.append(f"conn {c}: {name} is not binary")
        if sol.Y[d] not in (0, 1):
            problems.append(f"conn {c}: Y={sol.Y[d]} not binary")
        if sol.Z[d] < 0:
            problems.append(f"conn {c}: Z={sol.Z[d]} negative")
        if sol.V[d] < 0:
            problems.append(f"conn {c}: V={sol.V[d]} negative")

        if int(q.sum()) != 1:
            problems.append(f"conn {c}: must select exactly one (path, interval)")
        for p in range(P):
            if int(q[p].sum()) != int(R[p]):
                problems.append(f"conn {c} path {p}: path indicator disagrees with q")
            want = int((demand.rho[p] * q[p]).sum())
            if int(W[p].sum()) != want:
                problems.append(
                    f"conn {c} path {p}: allocated {int(W[p].sum())} slots, "
                    f"selected requirement is {want}"
                )
            for f in range(F):
                rise = int(W[p, f]) - (int(W[p, f - 1]) if f > 0 else 0)
                if int(psi[p, f]) < rise:
                    problems.append(
                        f"conn {c} path {p} slot {f}: block start not flagged"
                    )
        if int(psi.sum()) > 1:
            problems.append(f"conn {c}: more than one block start (contiguity)")
        # Disruption flag: 1 unless the flagged start lands in the previous block.
        overlap = 0
        if demand.has_prev:
            p0 = demand.prev_path_pos
            s0, w0 = demand.prev_start, demand.prev_width
            overlap = int(sol.psi[d][p0, s0 : s0 + w0].sum())
        if int(sol.Y[d]) != 1 - overlap:
            problems.append(
                f"conn {c}: Y={int(sol.Y[d])} but start-in-previous-block sum is {overlap}"
            )
        for p in range(P):
            width = int(W[p].sum())
            for i in range(U):
                need = int(demand.rho[p, i]) * int(R[p])
                if int(sol.Z[d]) < need - width:
                    problems.append(
                        f"conn {c} path {p} interval {i}: Z below requirement gap"
                    )
                if int(sol.V[d]) < width - need:
                    problems.append(
                        f"conn {c} path {p} interval {i}: V below allocation gap"
                    )

    if not _is_binary(sol.X):
        problems.append("X is not binary")
    if sol.f_max < 0:
        problems.append(f"F_max={sol.f_max} negative")
    coverage = np.zeros((L, F), dtype=np.int64)
    for d, demand in enumerate(instance.demands):
        for p, path in enumerate(demand.paths):
            row = sol.W[d][p]
            if row.any():
                for link in path.links:
                    coverage[link] += row
    over = coverage > sol.X
    for link, f in np.argwhere(over):
        problems.append(
            f"link {int(link)} slot {int(f)}: coverage {int(coverage[link, f])} "
            f"exceeds X={int(sol.X[link, f])}"
        )
    for link, f in np.argwhere(sol.X > 0):
        if (int(f) + 1) * int(sol.X[link, f]) > sol.f_max:
            problems.append(
                f"link {int(link)} slot {int(f)}: occupied above F_max={sol.f_max}"
            )
    return problems
