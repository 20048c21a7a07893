"""Scenario configuration, the planning-epoch loop, and metric aggregation.

A run walks the test span of the traffic trace in steps of u intervals.  At
each epoch the configured engine re-provisions every connection from that
epoch's u-step prediction; afterwards the true 5-minute fluctuations of the
covered intervals are scored against what was allocated.  Disruptions are
counted uniformly across engines: a connection is disrupted when its new
block starts outside its previous block, or its path changed.
"""

from __future__ import annotations

import csv
import dataclasses
import math
import os
import random
import time
from dataclasses import dataclass

import yaml

from .errors import ConfigError, DataError
from .heuristics import select_mad, select_mmd, provision_epoch
from .ilp import (
    SC1_WEIGHTS,
    SC2_WEIGHTS,
    SolverReport,
    apply_solution,
    build_instance,
    solve_exact,
)
from .spectrum import ActionKind, ActionOutcome, Allocation, NetworkState, validate
from .topology import (
    DEFAULT_REACH_TABLE,
    CandidatePath,
    ModulationFormat,
    Topology,
    fs_required,
    load_topology,
    validate_reach_table,
    yen_k_shortest,
)
from .traffic import (
    SAMPLE_MINUTES,
    IntervalizedSeries,
    PredictionMatrix,
    intervalize,
    ingest_predictions,
    read_trace,
)

__all__ = [
    "APPROACHES",
    "ScenarioConfig",
    "GapSums",
    "RunMetrics",
    "EpochRecord",
    "RunResult",
    "load_scenario",
    "build_demands",
    "window_metrics",
    "run",
    "compare",
    "emit_reports",
]

APPROACHES = ("mmd", "mad", "ilp-sc1", "ilp-sc2", "ilp-custom")

SUMMARY_COLUMNS = [
    "approach",
    "u",
    "blocked",
    "disruptions",
    "under_gbps",
    "over_gbps",
    "under_fs",
    "over_fs",
    "utilization_fs",
    "f_max",
    "avg_epoch_ms",
]
EPOCH_COLUMNS = [
    "approach",
    "u",
    "epoch",
    "placed",
    "unchanged",
    "reduced",
    "expanded",
    "reallocated",
    "blocked",
    "disruptions",
    "utilization_fs",
    "f_max",
    "epoch_ms",
]


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    topology_path: str
    trace_path: str
    t_test: int
    num_slots: int = 200
    slot_width_ghz: float = 12.5
    baud_gbaud: float = 10.5
    k_paths: int = 3
    reach_table: tuple[ModulationFormat, ...] = DEFAULT_REACH_TABLE
    demand_pairs: tuple[tuple[str, str], ...] | None = None
    demand_seed: int = 0
    tau_minutes: int = 30
    scale: float = 30.0
    u: int = 4
    predictions_path: str | None = None
    approach: str = "mmd"
    weights: tuple[float, float, float, float, float] | None = None
    time_limit_s: float | None = None
    dataset_r: int | None = None
    out_dir: str | None = None


def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return mapping[key]


def load_scenario(path: str, overrides: dict | None = None) -> ScenarioConfig:
    """Parse a scenario YAML file; relative data paths resolve next to it.

    ``overrides`` may replace approach, u, demand_seed, weights, out_dir,
    and time_limit_s after parsing (the CLI flags map onto these).
    """
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(f"scenario file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: scenario must be a mapping")
    base = os.path.dirname(os.path.abspath(path))

    def respath(p: str) -> str:
        return p if os.path.isabs(p) else os.path.join(base, p)

    grid = raw.get("grid", {}) or {}
    paths_cfg = raw.get("paths", {}) or {}
    demands = raw.get("demands", {}) or {}
    traffic_cfg = _require(raw, "traffic", path)
    horizon = _require(raw, "horizon", path)

    reach_table = DEFAULT_REACH_TABLE
    if "reach_table" in paths_cfg:
        rows = paths_cfg["reach_table"]
        if not isinstance(rows, list) or not rows:
            raise ConfigError(f"{path}: paths.reach_table must be a non-empty list")
        try:
            reach_table = tuple(
                ModulationFormat(
                    str(r["name"]), int(r["bits_per_symbol"]), float(r["max_reach_km"])
                )
                for r in rows
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: bad reach_table entry: {exc}") from None

    pairs = None
    if "pairs" in demands:
        rows = demands["pairs"]
        if not isinstance(rows, list) or not rows:
            raise ConfigError(f"{path}: demands.pairs must be a non-empty list")
        pairs = []
        for row in rows:
            if not isinstance(row, (list, tuple)) or len(row) != 2:
                raise ConfigError(f"{path}: each demand pair needs 2 nodes: {row!r}")
            pairs.append((str(row[0]), str(row[1])))
        pairs = tuple(pairs)

    weights = raw.get("weights")
    if weights is not None:
        weights = _parse_weights(weights, where=path)

    ilp_cfg = raw.get("ilp", {}) or {}
    dataset_cfg = raw.get("dataset", {}) or {}

    try:
        cfg = ScenarioConfig(
            name=str(raw.get("name", os.path.splitext(os.path.basename(path))[0])),
            topology_path=respath(str(_require(raw, "topology", path))),
            trace_path=respath(str(_require(traffic_cfg, "trace", f"{path}: traffic"))),
            t_test=int(_require(horizon, "t_test", f"{path}: horizon")),
            num_slots=int(grid.get("num_slots", 200)),
            slot_width_ghz=float(grid.get("slot_width_ghz", 12.5)),
            baud_gbaud=float(grid.get("baud_gbaud", 10.5)),
            k_paths=int(paths_cfg.get("k", 3)),
            reach_table=reach_table,
            demand_pairs=pairs,
            demand_seed=int(demands.get("seed", 0)),
            tau_minutes=int(traffic_cfg.get("tau_minutes", 30)),
            scale=float(traffic_cfg.get("scale", 30.0)),
            u=int(_require(horizon, "u", f"{path}: horizon")),
            predictions_path=(
                respath(str(raw["predictions"])) if raw.get("predictions") else None
            ),
            approach=str(raw.get("approach", "mmd")),
            weights=weights,
            time_limit_s=(
                float(ilp_cfg["time_limit_s"]) if "time_limit_s" in ilp_cfg else None
            ),
            dataset_r=int(dataset_cfg["r"]) if "r" in dataset_cfg else None,
            out_dir=respath(str(raw["out"])) if raw.get("out") else None,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: bad value: {exc}") from None

    if overrides:
        allowed = {
            "approach",
            "u",
            "demand_seed",
            "weights",
            "out_dir",
            "time_limit_s",
        }
        unknown = set(overrides) - allowed
        if unknown:
            raise ConfigError(f"unknown overrides: {sorted(unknown)}")
        cfg = dataclasses.replace(cfg, **overrides)
    _validate_config(cfg)
    return cfg


def _parse_weights(value, where: str) -> tuple[float, float, float, float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 5:
        raise ConfigError(f"{where}: weights must be 5 numbers")
    try:
        w = tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: weights must be numeric") from None
    if any(v < 0 for v in w):
        raise ConfigError(f"{where}: weights must be non-negative")
    return w


def _validate_config(cfg: ScenarioConfig) -> None:
    if cfg.approach not in APPROACHES:
        raise ConfigError(
            f"unknown approach {cfg.approach!r}; choose from {', '.join(APPROACHES)}"
        )
    if cfg.approach == "ilp-custom" and cfg.weights is None:
        raise ConfigError("approach ilp-custom needs an explicit weights vector")
    if cfg.u < 1:
        raise ConfigError(f"u must be >= 1: {cfg.u}")
    if cfg.t_test < 1:
        raise ConfigError(f"t_test must be >= 1: {cfg.t_test}")
    if cfg.num_slots < 1:
        raise ConfigError(f"num_slots must be >= 1: {cfg.num_slots}")
    if cfg.k_paths < 1:
        raise ConfigError(f"paths.k must be >= 1: {cfg.k_paths}")
    if cfg.baud_gbaud <= 0:
        raise ConfigError(f"baud_gbaud must be positive: {cfg.baud_gbaud}")
    if cfg.tau_minutes < 1 or cfg.tau_minutes % SAMPLE_MINUTES != 0:
        raise ConfigError(
            f"tau_minutes must be a positive multiple of {SAMPLE_MINUTES}:"
            f" {cfg.tau_minutes}"
        )
    if cfg.scale <= 0:
        raise ConfigError(f"scale must be positive: {cfg.scale}")
    if cfg.time_limit_s is not None and cfg.time_limit_s <= 0:
        raise ConfigError(f"time_limit_s must be positive: {cfg.time_limit_s}")
    if cfg.dataset_r is not None and cfg.dataset_r < 1:
        raise ConfigError(f"dataset.r must be >= 1: {cfg.dataset_r}")
    try:
        validate_reach_table(cfg.reach_table)
    except ValueError as exc:
        raise ConfigError(f"bad reach table: {exc}") from None


def resolve_weights(cfg: ScenarioConfig) -> tuple[float, ...] | None:
    """Weight vector for the configured approach; None for heuristics."""
    if cfg.approach in ("mmd", "mad"):
        return None
    if cfg.weights is not None:
        return cfg.weights
    if cfg.approach == "ilp-sc1":
        return SC1_WEIGHTS
    if cfg.approach == "ilp-sc2":
        return SC2_WEIGHTS
    raise ConfigError("approach ilp-custom needs an explicit weights vector")


def build_demands(topo: Topology, cfg: ScenarioConfig) -> dict[int, tuple[str, str]]:
    """Connection id -> (source, destination) node ids.

    Explicit pairs are used verbatim; otherwise one connection per node is
    drawn, destination chosen by the seeded generator among the other nodes.
    """
    if cfg.demand_pairs is not None:
        out: dict[int, tuple[str, str]] = {}
        for i, (src, dst) in enumerate(cfg.demand_pairs):
            for nid in (src, dst):
                if nid not in topo.node_index:
                    raise ConfigError(f"demand pair {src}->{dst}: unknown node {nid!r}")
            if src == dst:
                raise ConfigError(f"demand pair {i}: source equals destination")
            out[i] = (src, dst)
        return out
    rng = random.Random(cfg.demand_seed)
    out = {}
    for i, src in enumerate(topo.node_ids):
        others = [n for n in topo.node_ids if n != src]
        out[i] = (src, others[rng.randrange(len(others))])
    return out


@dataclass
class GapSums:
    """Raw provisioning-gap sums before per-sample averaging."""

    under_gbps: float = 0.0
    over_gbps: float = 0.0
    under_fs: int = 0
    over_fs: int = 0

    def add(self, other: "GapSums") -> None:
        self.under_gbps += other.under_gbps
        self.over_gbps += other.over_gbps
        self.under_fs += other.under_fs
        self.over_fs += other.over_fs


def window_metrics(
    allocations: dict[int, Allocation],
    window: dict[int, tuple[tuple[float, ...], ...]],
    baud_gbaud: float,
    scale: float = 1.0,
) -> GapSums:
    """Score true fluctuations against what stands allocated.

    ``window`` maps connection -> per-interval 5-minute sample tuples (raw
    Gbps; each sample is multiplied by ``scale`` before comparison).  An
    allocation of w slots is in band when the scaled fluctuation fits within
    w slots but would not fit within w-1: above the band it accrues
    under-provisioning, below it over-provisioning, in Gbps against the band
    edges and in FS against the exact slot need.  Connections without an
    allocation (blocked) accrue nothing.
    """
    sums = GapSums()
    for conn in sorted(window):
        alloc = allocations.get(conn)
        if alloc is None:
            continue
        mf = alloc.path.modulation
        slot_gbps = baud_gbaud * mf.bits_per_symbol
        cap_max = alloc.width * slot_gbps
        cap_min = (alloc.width - 1) * slot_gbps
        for interval in window[conn]:
            for phi in interval:
                demand = scale * phi
                rho_true = fs_required(demand, baud_gbaud, mf)
                if rho_true > alloc.width:
                    sums.under_fs += rho_true - alloc.width
                elif rho_true < alloc.width:
                    sums.over_fs += alloc.width - rho_true
                if demand > cap_max:
                    sums.under_gbps += demand - cap_max
                elif demand < cap_min:
                    sums.over_gbps += cap_min - demand
    return sums


@dataclass(frozen=True)
class RunMetrics:
    approach: str
    u: int
    num_epochs: int
    blocked: int
    disruptions: int
    under_gbps: float
    over_gbps: float
    under_fs: float
    over_fs: float
    utilization_fs: float
    f_max: float
    avg_epoch_ms: float


@dataclass
class EpochRecord:
    epoch: int
    predictions: PredictionMatrix
    prev_allocations: dict[int, Allocation]
    new_allocations: dict[int, Allocation]
    outcomes: dict[int, ActionOutcome]
    disruptions: int
    blocked: int
    utilization_fs: int
    f_max: int
    wall_ms: float
    solver: SolverReport | None


@dataclass
class RunResult:
    scenario: str
    approach: str
    u: int
    metrics: RunMetrics
    epochs: list[EpochRecord]


def count_relocations(
    prev: dict[int, Allocation], cur: dict[int, Allocation]
) -> int:
    """Connections whose new block starts outside the old one or moved path."""
    n = 0
    for conn, old in prev.items():
        new = cur.get(conn)
        if new is not None and (new.path != old.path or not old.covers(new.start)):
            n += 1
    return n


def _prepare(cfg: ScenarioConfig):
    topo = load_topology(cfg.topology_path)
    demands = build_demands(topo, cfg)
    candidates: dict[int, list[CandidatePath]] = {}
    for conn, (src, dst) in demands.items():
        paths = yen_k_shortest(topo, src, dst, cfg.k_paths, cfg.reach_table)
        if not paths:
            raise DataError(
                f"demand {conn} ({src}->{dst}): no reachable candidate path"
            )
        candidates[conn] = paths
    series = read_trace(cfg.trace_path)
    missing = sorted(set(demands) - set(series))
    if missing:
        raise DataError(
            f"{cfg.trace_path}: trace lacks connections {missing}"
        )
    iv: dict[int, IntervalizedSeries] = {
        conn: intervalize(series[conn], cfg.tau_minutes) for conn in sorted(demands)
    }
    lengths = {s.num_intervals for s in iv.values()}
    if len(lengths) != 1:
        raise DataError(
            f"{cfg.trace_path}: connections disagree on interval count: {sorted(lengths)}"
        )
    total = lengths.pop()
    warmup_needed = 0 if cfg.predictions_path else 1
    if total < cfg.t_test + warmup_needed:
        raise DataError(
            f"{cfg.trace_path}: {total} intervals cannot cover t_test={cfg.t_test}"
            + ("" if cfg.predictions_path else " plus one warm-up interval")
        )
    return topo, demands, candidates, iv, total - cfg.t_test


def _naive_matrix(
    iv: dict[int, IntervalizedSeries], epoch: int, t_now: int, u: int, scale: float
) -> PredictionMatrix:
    rates = {
        conn: (scale * series.interval_max[t_now],) * u
        for conn, series in iv.items()
    }
    return PredictionMatrix(epoch=epoch, horizon=u, rates=rates)


def _ilp_epoch(
    state: NetworkState,
    pred: PredictionMatrix,
    candidates: dict[int, list[CandidatePath]],
    weights: tuple[float, ...],
    baud_gbaud: float,
    time_limit_s: float | None,
) -> tuple[dict[int, ActionOutcome], SolverReport | None]:
    """Solve and apply one epoch, dropping demands until feasible.

    On infeasibility the demand with the largest minimal slot requirement is
    blocked (ties to the smallest id), releasing anything it held, and the
    reduced instance is re-solved.
    """
    rates = dict(pred.rates)
    blocked: dict[int, Allocation | None] = {}
    report: SolverReport | None = None
    while rates:
        matrix = PredictionMatrix(epoch=pred.epoch, horizon=pred.horizon, rates=rates)
        instance = build_instance(state, matrix, candidates, weights, baud_gbaud)
        solution, report = solve_exact(instance, time_limit_s)
        if report.status == "infeasible":
            by_demand = {d.conn: int(d.rho.min()) for d in instance.demands}
            drop = max(sorted(by_demand), key=lambda c: by_demand[c])
            blocked[drop] = state.allocation(drop)
            if state.allocation(drop) is not None:
                state.release(drop)
            del rates[drop]
            continue
        if solution is None:
            raise RuntimeError(
                f"solver gave up without a solution (status {report.status})"
            )
        apply_report = apply_solution(state, instance, solution)
        outcomes = dict(apply_report.outcomes)
        for conn, old in blocked.items():
            outcomes[conn] = ActionOutcome(ActionKind.BLOCKED, old, None)
        return outcomes, report
    outcomes = {
        conn: ActionOutcome(ActionKind.BLOCKED, old, None)
        for conn, old in blocked.items()
    }
    return outcomes, report


def run(cfg: ScenarioConfig) -> RunResult:
    """Simulate every planning epoch of the scenario and aggregate metrics."""
    topo, demands, candidates, iv, test_start = _prepare(cfg)
    num_epochs = math.ceil(cfg.t_test / cfg.u)
    weights = resolve_weights(cfg)

    matrices: dict[int, PredictionMatrix] | None = None
    if cfg.predictions_path:
        matrices = ingest_predictions(
            cfg.predictions_path,
            cfg.u,
            scale=cfg.scale,
            expected_conns=set(demands),
            num_epochs=num_epochs,
        )

    state = NetworkState(topo.num_links, cfg.num_slots)
    sums = GapSums()
    epochs: list[EpochRecord] = []
    k = next(iter(iv.values())).k

    for epoch in range(num_epochs):
        t0 = time.perf_counter()
        if matrices is not None:
            pred = matrices[epoch]
        else:
            pred = _naive_matrix(
                iv, epoch, test_start + epoch * cfg.u - 1, cfg.u, cfg.scale
            )
        prev = state.snapshot()
        solver_report = None
        if cfg.approach in ("mmd", "mad"):
            selection = (select_mmd if cfg.approach == "mmd" else select_mad)(pred)
            report = provision_epoch(state, selection, candidates, cfg.baud_gbaud)
            outcomes = dict(report.by_conn)
        else:
            outcomes, solver_report = _ilp_epoch(
                state, pred, candidates, weights, cfg.baud_gbaud, cfg.time_limit_s
            )
        wall_ms = (time.perf_counter() - t0) * 1e3

        problems = validate(state)
        if problems:
            raise RuntimeError(
                f"epoch {epoch} left the state invalid: {problems[:3]}"
            )
        cur = state.snapshot()

        lo = test_start + epoch * cfg.u
        hi = test_start + min((epoch + 1) * cfg.u, cfg.t_test)
        window = {conn: iv[conn].intervals[lo:hi] for conn in sorted(demands)}
        sums.add(window_metrics(cur, window, cfg.baud_gbaud, cfg.scale))

        epochs.append(
            EpochRecord(
                epoch=epoch,
                predictions=pred,
                prev_allocations=prev,
                new_allocations=cur,
                outcomes=outcomes,
                disruptions=count_relocations(prev, cur),
                blocked=sum(
                    1 for o in outcomes.values() if o.kind is ActionKind.BLOCKED
                ),
                utilization_fs=state.occupied_cells(),
                f_max=state.max_slot_id(),
                wall_ms=wall_ms,
                solver=solver_report,
            )
        )

    samples = cfg.t_test * len(demands) * k
    metrics = RunMetrics(
        approach=cfg.approach,
        u=cfg.u,
        num_epochs=num_epochs,
        blocked=sum(e.blocked for e in epochs),
        disruptions=sum(e.disruptions for e in epochs),
        under_gbps=sums.under_gbps / samples,
        over_gbps=sums.over_gbps / samples,
        under_fs=sums.under_fs / samples,
        over_fs=sums.over_fs / samples,
        utilization_fs=sum(e.utilization_fs for e in epochs) / num_epochs,
        f_max=sum(e.f_max for e in epochs) / num_epochs,
        avg_epoch_ms=sum(e.wall_ms for e in epochs) / num_epochs,
    )
    return RunResult(
        scenario=cfg.name, approach=cfg.approach, u=cfg.u, metrics=metrics, epochs=epochs
    )


def compare(
    cfg: ScenarioConfig, approaches: list[str], u_list: list[int]
) -> list[RunResult]:
    """Run every (approach, u) combination on the same scenario."""
    for approach in approaches:
        if approach not in APPROACHES:
            raise ConfigError(f"unknown approach {approach!r}")
    if not approaches or not u_list:
        raise ConfigError("compare needs at least one approach and one u")
    results = []
    for approach in approaches:
        for u in u_list:
            if u < 1:
                raise ConfigError(f"u must be >= 1: {u}")
            results.append(
                run(dataclasses.replace(cfg, approach=approach, u=u))
            )
    return results


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_reports(
    results: list[RunResult], out_dir: str, include_timing: bool = False
) -> dict[str, str]:
    """Write summary and per-epoch CSVs; returns their paths.

    Wall-clock columns are zeroed unless ``include_timing`` is set, so that
    identical runs produce byte-identical files.
    """
    os.makedirs(out_dir, exist_ok=True)
    summary_path = os.path.join(out_dir, "summary.csv")
    epochs_path = os.path.join(out_dir, "epochs.csv")
    ordered = sorted(results, key=lambda r: (r.approach, r.u))
    with open(summary_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        for res in ordered:
            m = res.metrics
            writer.writerow(
                [
                    m.approach,
                    m.u,
                    m.blocked,
                    m.disruptions,
                    _fmt(m.under_gbps),
                    _fmt(m.over_gbps),
                    _fmt(m.under_fs),
                    _fmt(m.over_fs),
                    _fmt(m.utilization_fs),
                    _fmt(m.f_max),
                    _fmt(m.avg_epoch_ms if include_timing else 0.0),
                ]
            )
    with open(epochs_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(EPOCH_COLUMNS)
        for res in ordered:
            for e in res.epochs:
                counts = {kind: 0 for kind in ActionKind}
                for outcome in e.outcomes.values():
                    counts[outcome.kind] += 1
                writer.writerow(
                    [
                        res.approach,
                        res.u,
                        e.epoch,
                        counts[ActionKind.PLACED],
                        counts[ActionKind.UNCHANGED],
                        counts[ActionKind.REDUCED],
                        counts[ActionKind.EXPANDED],
                        counts[ActionKind.REALLOCATED],
                        counts[ActionKind.BLOCKED],
                        e.disruptions,
                        e.utilization_fs,
                        e.f_max,
                        _fmt(e.wall_ms if include_timing else 0.0),
                    ]
                )
    return {"summary": summary_path, "epochs": epochs_path}
