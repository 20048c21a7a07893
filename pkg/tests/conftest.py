"""Shared builders for the test suite.

Most tests need one of three things: hand-made candidate paths over a fake
link set, seeded random solver instances, or a full scenario directory
(topology + trace + YAML) on disk.  The LP-file parser at the bottom exists
so an external MILP solver can act as an independent oracle for the exact
planner.
"""

from __future__ import annotations

import random
from pathlib import Path

import numpy as np

from eonplan.ilp import IlpInstance, build_instance
from eonplan.spectrum import (
    ActionKind,
    Allocation,
    NetworkState,
    first_fit_place,
    plan_action,
    validate,
)
from eonplan.topology import (
    DEFAULT_REACH_TABLE,
    CandidatePath,
    ModulationFormat,
)
from eonplan.traffic import PredictionMatrix

REPO_ROOT = Path(__file__).resolve().parents[1]
SCENARIO_DIR = REPO_ROOT / "scenarios"

MODS = {m.name: m for m in DEFAULT_REACH_TABLE}


def fab_path(
    path_index: int = 0,
    links: tuple[int, ...] = (0,),
    modulation: str | ModulationFormat = "QPSK",
    length_km: float | None = None,
) -> CandidatePath:
    """A candidate path over raw link indices; nodes are synthetic."""
    mf = MODS[modulation] if isinstance(modulation, str) else modulation
    if length_km is None:
        length_km = 100.0 * len(links)
    return CandidatePath(
        path_index=path_index,
        nodes=tuple(range(len(links) + 1)),
        links=tuple(links),
        total_length_km=float(length_km),
        modulation=mf,
    )


def rate_for_width(
    width: int, modulation: str | ModulationFormat = "QPSK", baud: float = 10.5
) -> float:
    """A rate that needs exactly ``width`` slots (1 Gbps below the band top)."""
    mf = MODS[modulation] if isinstance(modulation, str) else modulation
    if width == 0:
        return 0.0
    return width * baud * mf.bits_per_symbol - 1.0


# ---------------------------------------------------------------------------
# Seeded random solver instances


def random_instance(
    seed: int,
    *,
    max_conns: int = 3,
    max_paths: int = 2,
    max_slots: int = 10,
    max_u: int = 2,
    max_links: int = 5,
    prev_prob: float = 0.5,
    baud: float = 10.5,
    weights: tuple[float, float, float, float, float] = (20.0, 20.0, 1.0, 0.01, 10.0),
) -> tuple[NetworkState, PredictionMatrix, dict[int, list[CandidatePath]], IlpInstance]:
    """A small random instance; may be infeasible (rho can exceed the grid)."""
    rng = random.Random(seed)
    num_links = rng.randint(2, max_links)
    num_slots = rng.randint(4, max_slots)
    horizon = rng.randint(1, max_u)
    num_conns = rng.randint(1, max_conns)
    state = NetworkState(num_links, num_slots)
    candidates: dict[int, list[CandidatePath]] = {}
    rates: dict[int, tuple[float, ...]] = {}
    for conn in range(num_conns):
        paths = []
        for p in range(rng.randint(1, max_paths)):
            n = rng.randint(1, min(3, num_links))
            links = tuple(rng.sample(range(num_links), n))
            mf = rng.choice(DEFAULT_REACH_TABLE)
            paths.append(fab_path(p, links, mf, 50.0 * n))
        candidates[conn] = paths
        row = []
        for _ in range(horizon):
            w = rng.randint(0, max(2, num_slots // 2))
            mf0 = paths[0].modulation
            slot = baud * mf0.bits_per_symbol
            if w == 0:
                row.append(0.0)
            else:
                row.append(round(rng.uniform((w - 1) * slot + 0.1, w * slot), 3))
        rates[conn] = tuple(row)
    for conn in range(num_conns):
        if rng.random() < prev_prob:
            path = rng.choice(candidates[conn])
            w = rng.randint(1, max(1, num_slots // 2))
            start = first_fit_place(state, path, w)
            if start is not None:
                state.place(Allocation(conn, path, start, w))
    pred = PredictionMatrix(epoch=0, horizon=horizon, rates=rates)
    instance = build_instance(state, pred, candidates, weights, baud)
    return state, pred, candidates, instance


def ample_instance(
    seed: int,
    *,
    max_conns: int = 6,
    num_slots: int = 40,
    baud: float = 10.5,
    weights: tuple[float, float, float, float, float] = (20.0, 20.0, 1.0, 0.01, 10.0),
) -> tuple[NetworkState, PredictionMatrix, dict[int, list[CandidatePath]], IlpInstance]:
    """A random instance sized so first-fit provisioning never blocks.

    All paths share one modulation and per-connection widths stay within
    ``num_slots // num_conns``, so even a worst-case single shared link can
    hold every connection at its peak.
    """
    rng = random.Random(seed)
    num_links = rng.randint(2, 6)
    horizon = rng.randint(1, 3)
    num_conns = rng.randint(2, max_conns)
    budget = num_slots // num_conns
    mf = MODS["QPSK"]
    slot = baud * mf.bits_per_symbol
    state = NetworkState(num_links, num_slots)
    candidates: dict[int, list[CandidatePath]] = {}
    rates: dict[int, tuple[float, ...]] = {}
    for conn in range(num_conns):
        paths = []
        for p in range(rng.randint(1, 2)):
            n = rng.randint(1, min(3, num_links))
            links = tuple(rng.sample(range(num_links), n))
            paths.append(fab_path(p, links, mf, 50.0 * n))
        candidates[conn] = paths
        row = []
        for _ in range(horizon):
            w = rng.randint(1, budget)
            row.append(round(rng.uniform((w - 1) * slot + 0.1, w * slot), 3))
        rates[conn] = tuple(row)
    for conn in range(num_conns):
        if rng.random() < 0.6:
            path = rng.choice(candidates[conn])
            w = rng.randint(1, budget)
            # Park each held block at the base of its own per-connection
            # band so later in-place growth never collides with a neighbour.
            state.place(Allocation(conn, path, conn * budget, w))
    pred = PredictionMatrix(epoch=0, horizon=horizon, rates=rates)
    instance = build_instance(state, pred, candidates, weights, baud)
    return state, pred, candidates, instance


def encode_assignment(
    instance: IlpInstance, state: NetworkState
) -> tuple[tuple[int, int, int], ...]:
    """Express a provisioned state as a per-demand (path, interval, start).

    Requires every demand to hold an allocation whose width matches one of
    its per-interval requirements on the held path (true for both selection
    policies, whose widths are a column entry or a row maximum of rho).
    """
    assign = []
    for demand in instance.demands:
        alloc = state.allocation(demand.conn)
        if alloc is None:
            raise AssertionError(f"connection {demand.conn} holds nothing")
        p = demand.paths.index(alloc.path)
        row = demand.rho[p]
        hits = [i for i in range(row.shape[0]) if int(row[i]) == alloc.width]
        if not hits:
            raise AssertionError(
                f"connection {demand.conn}: width {alloc.width} matches no interval"
            )
        assign.append((p, hits[0], alloc.start))
    return tuple(assign)


# ---------------------------------------------------------------------------
# Scenario directories on disk


def write_scenario(
    directory: Path,
    *,
    edges: list[tuple[str, str, float]],
    pairs: list[tuple[str, str]],
    samples: dict[int, list[float]],
    t_test: int,
    u: int,
    num_slots: int = 40,
    k_paths: int = 2,
    tau_minutes: int = 5,
    scale: float = 1.0,
    unit: str = "gbps",
    approach: str = "mmd",
    name: str | None = None,
    predictions: str | None = None,
    weights: tuple[float, ...] | None = None,
    out: str | None = None,
) -> Path:
    """Write topology.csv, trace.csv, and scenario.yaml; returns the YAML path."""
    directory.mkdir(parents=True, exist_ok=True)
    topo_path = directory / "topology.csv"
    with open(topo_path, "w") as fh:
        fh.write("node_a,node_b,length_km\n")
        for a, b, length in edges:
            fh.write(f"{a},{b},{length!r}\n")
    trace_path = directory / "trace.csv"
    with open(trace_path, "w") as fh:
        fh.write(f"connection_id,sample_index,{unit}\n")
        for conn in sorted(samples):
            for i, v in enumerate(samples[conn]):
                fh.write(f"{conn},{i},{v!r}\n")
    lines = [
        f"name: {name or directory.name}",
        "topology: topology.csv",
        "traffic:",
        "  trace: trace.csv",
        f"  tau_minutes: {tau_minutes}",
        f"  scale: {scale!r}",
        "horizon:",
        f"  t_test: {t_test}",
        f"  u: {u}",
        "grid:",
        f"  num_slots: {num_slots}",
        "paths:",
        f"  k: {k_paths}",
        "demands:",
        "  pairs:",
    ]
    for a, b in pairs:
        lines.append(f"    - [{a}, {b}]")
    lines.append(f"approach: {approach}")
    if predictions:
        lines.append(f"predictions: {predictions}")
    if weights is not None:
        lines.append(f"weights: [{', '.join(repr(float(w)) for w in weights)}]")
    if out:
        lines.append(f"out: {out}")
    yaml_path = directory / "scenario.yaml"
    yaml_path.write_text("\n".join(lines) + "\n")
    return yaml_path


def run_action_sequence(seed, steps=12):
    rng = random.Random(seed)
    num_links = rng.randint(2, 4)
    num_slots = rng.randint(6, 16)
    state = NetworkState(num_links, num_slots)
    conns = list(range(rng.randint(1, 4)))
    candidates = {}
    for c in conns:
        paths = []
        for p in range(rng.randint(1, 2)):
            n = rng.randint(1, 2)
            links = tuple(rng.sample(range(num_links), n))
            paths.append(fab_path(p, links))
        candidates[c] = paths
    for _ in range(steps):
        conn = rng.choice(conns)
        widths = [rng.randint(1, max(1, num_slots // 2)) for _ in candidates[conn]]
        old = state.allocation(conn)
        outcome = plan_action(state, conn, candidates[conn], widths)
        if old is not None:
            pos = candidates[conn].index(old.path)
            if widths[pos] <= old.width:
                assert outcome.kind in (ActionKind.UNCHANGED, ActionKind.REDUCED), (
                    f"seed {seed}: shrink to {widths[pos]} from {old.width} "
                    f"gave {outcome.kind}"
                )
        problems = validate(state)
        assert problems == [], f"seed {seed}: {problems[:3]}"
        # Cross-check the cell accounting against the allocation table.
        want_cells = sum(
            a.width * len(a.path.links) for a in state.allocations.values()
        )
        assert state.occupied_cells() == want_cells
    return state


# ---------------------------------------------------------------------------
# LP-file parsing and an external MILP oracle


def parse_lp(path: str | Path):
    """Parse the LP files this package writes (one constraint per line)."""
    objective: dict[str, float] = {}
    rows: list[tuple[str, dict[str, float], str, float]] = []
    binaries: list[str] = []
    generals: list[str] = []
    section = None
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("\\"):
            continue
        low = line.lower()
        if low == "minimize":
            section = "objective"
            continue
        if low == "subject to":
            section = "constraints"
            continue
        if low == "binaries":
            section = "binaries"
            continue
        if low == "generals":
            section = "generals"
            continue
        if low == "end":
            break
        if section == "objective":
            objective = _parse_terms(line.split(":", 1)[1])
        elif section == "constraints":
            name, body = line.split(":", 1)
            for op in (">=", "<=", "="):
                if op in body:
                    lhs, rhs = body.split(op, 1)
                    rows.append((name.strip(), _parse_terms(lhs), op, float(rhs)))
                    break
            else:
                raise ValueError(f"constraint without comparator: {line}")
        elif section == "binaries":
            binaries.append(line)
        elif section == "generals":
            generals.append(line)
    return objective, rows, binaries, generals


def _parse_terms(expr: str) -> dict[str, float]:
    coeffs: dict[str, float] = {}
    sign = 1.0
    pending: float | None = None
    for token in expr.split():
        if token == "+":
            sign, pending = 1.0, None
        elif token == "-":
            sign, pending = -1.0, None
        else:
            try:
                pending = float(token)
            except ValueError:
                value = sign * (1.0 if pending is None else pending)
                coeffs[token] = coeffs.get(token, 0.0) + value
                sign, pending = 1.0, None
    return coeffs


def milp_optimum(path: str | Path) -> float | None:
    """Optimal objective of an exported LP file via scipy's MILP solver."""
    from scipy.optimize import Bounds, LinearConstraint, milp

    objective, rows, binaries, generals = parse_lp(path)
    names = list(dict.fromkeys(binaries + generals))
    index = {n: i for i, n in enumerate(names)}
    n = len(names)
    c = np.zeros(n)
    for var, coef in objective.items():
        c[index[var]] = coef
    a = np.zeros((len(rows), n))
    lb = np.zeros(len(rows))
    ub = np.zeros(len(rows))
    for r, (_name, coeffs, op, rhs) in enumerate(rows):
        for var, coef in coeffs.items():
            a[r, index[var]] = coef
        if op == "<=":
            lb[r], ub[r] = -np.inf, rhs
        elif op == ">=":
            lb[r], ub[r] = rhs, np.inf
        else:
            lb[r], ub[r] = rhs, rhs
    is_binary = np.array([nm in set(binaries) for nm in names])
    bounds = Bounds(np.zeros(n), np.where(is_binary, 1.0, np.inf))
    res = milp(
        c=c,
        constraints=LinearConstraint(a, lb, ub),
        integrality=np.ones(n),
        bounds=bounds,
    )
    if res.status == 2:  # proven infeasible
        return None
    if res.status != 0:
        raise RuntimeError(f"external solver failed: {res.message}")
    return float(res.fun)
