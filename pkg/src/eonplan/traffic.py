"""Traffic traces, intervalization, sliding windows, and prediction ingest.

Raw traces are 5-minute samples per connection.  Planning works on coarser
intervals of tau minutes; the per-interval maximum is the fluctuation a
provisioned connection must survive, so maxima drive both the naive
predictor and the provisioning targets.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass

from .errors import DataError

__all__ = [
    "FluctuationSeries",
    "IntervalizedSeries",
    "Window",
    "WindowedDataset",
    "PredictionMatrix",
    "read_trace",
    "intervalize",
    "make_windows",
    "naive_predict",
    "ingest_predictions",
    "export_dataset",
    "load_dataset",
]

SAMPLE_MINUTES = 5


@dataclass(frozen=True)
class FluctuationSeries:
    """Per-connection bitrate samples in Gbps at the 5-minute cadence."""

    conn: int
    samples: tuple[float, ...]


@dataclass(frozen=True)
class IntervalizedSeries:
    """Samples regrouped into tau-minute intervals of k samples each."""

    conn: int
    tau_minutes: int
    k: int
    intervals: tuple[tuple[float, ...], ...]
    interval_max: tuple[float, ...]

    @property
    def num_intervals(self) -> int:
        return len(self.intervals)


@dataclass(frozen=True)
class Window:
    """One supervised example: ``t`` is the last input interval's index."""

    t: int
    inputs: tuple[float, ...]  # k * r raw samples, oldest interval first
    targets: tuple[float, ...]  # u interval maxima for t+1 .. t+u


@dataclass(frozen=True)
class WindowedDataset:
    conn: int
    r: int
    u: int
    k: int
    windows: tuple[Window, ...]


@dataclass(frozen=True)
class PredictionMatrix:
    """Predicted per-interval rates for one planning epoch, in Gbps."""

    epoch: int
    horizon: int
    rates: dict[int, tuple[float, ...]]

    def connections(self) -> list[int]:
        return sorted(self.rates)


def read_trace(path: str) -> dict[int, FluctuationSeries]:
    """Read a trace CSV with header ``connection_id,sample_index,<unit>``.

    The value column must be named ``mbps`` or ``gbps`` and decides the unit;
    series are returned in Gbps.  Each connection's sample indices must form
    0..n-1 exactly (any row order).
    """
    try:
        fh = open(path, newline="")
    except FileNotFoundError:
        raise DataError(f"trace file not found: {path}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty trace file") from None
        if len(header) != 3 or header[:2] != ["connection_id", "sample_index"]:
            raise DataError(
                f"{path}: expected header connection_id,sample_index,<mbps|gbps>"
            )
        unit = header[2]
        if unit not in ("mbps", "gbps"):
            raise DataError(f"{path}: value column must be mbps or gbps, got {unit!r}")
        factor = 0.001 if unit == "mbps" else 1.0
        rows: dict[int, dict[int, float]] = {}
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 3:
                raise DataError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            try:
                conn = int(row[0])
                idx = int(row[1])
                value = float(row[2])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric field") from None
            if conn < 0 or idx < 0:
                raise DataError(f"{path}:{lineno}: negative id or index")
            if value < 0 or not math.isfinite(value):
                raise DataError(f"{path}:{lineno}: bad rate {row[2]}")
            per_conn = rows.setdefault(conn, {})
            if idx in per_conn:
                raise DataError(
                    f"{path}:{lineno}: duplicate sample {idx} for connection {conn}"
                )
            per_conn[idx] = value * factor
    if not rows:
        raise DataError(f"{path}: trace has no data rows")
    out: dict[int, FluctuationSeries] = {}
    for conn in sorted(rows):
        per_conn = rows[conn]
        if set(per_conn) != set(range(len(per_conn))):
            raise DataError(
                f"{path}: connection {conn}: sample indices must form 0..n-1"
            )
        out[conn] = FluctuationSeries(
            conn, tuple(per_conn[i] for i in range(len(per_conn)))
        )
    return out


def intervalize(series: FluctuationSeries, tau_minutes: int) -> IntervalizedSeries:
    """Group samples into tau-minute intervals and record per-interval maxima.

    tau must be a positive multiple of the 5-minute cadence.  A trailing
    partial interval is dropped.
    """
    if tau_minutes <= 0 or tau_minutes % SAMPLE_MINUTES != 0:
        raise ValueError(
            f"tau_minutes must be a positive multiple of {SAMPLE_MINUTES}: {tau_minutes}"
        )
    k = tau_minutes // SAMPLE_MINUTES
    n = len(series.samples) // k
    if n < 1:
        raise DataError(
            f"connection {series.conn}: {len(series.samples)} samples cannot fill "
            f"one {tau_minutes}-minute interval"
        )
    intervals = tuple(
        tuple(series.samples[i * k : (i + 1) * k]) for i in range(n)
    )
    return IntervalizedSeries(
        conn=series.conn,
        tau_minutes=tau_minutes,
        k=k,
        intervals=intervals,
        interval_max=tuple(max(iv) for iv in intervals),
    )


def make_windows(series: IntervalizedSeries, r: int, u: int) -> WindowedDataset:
    """Sliding supervised windows: r input intervals, u target maxima.

    Window ``t`` takes the raw samples of intervals t-r+1 .. t as inputs
    (k*r values) and the interval maxima of t+1 .. t+u as targets; the series
    must span at least r+u intervals, yielding T-r-u+1 windows.
    """
    if r < 1 or u < 1:
        raise ValueError(f"r and u must be >= 1: r={r} u={u}")
    T = series.num_intervals
    if T < r + u:
        raise DataError(
            f"connection {series.conn}: need at least r+u={r + u} intervals, have {T}"
        )
    windows = []
    for t in range(r - 1, T - u):
        inputs: list[float] = []
        for iv in series.intervals[t - r + 1 : t + 1]:
            inputs.extend(iv)
        windows.append(
            Window(
                t=t,
                inputs=tuple(inputs),
                targets=series.interval_max[t + 1 : t + 1 + u],
            )
        )
    return WindowedDataset(series.conn, r, u, series.k, tuple(windows))


def naive_predict(history: IntervalizedSeries, u: int) -> tuple[float, ...]:
    """Persistence forecast: repeat the last observed interval maximum u times."""
    if u < 1:
        raise ValueError(f"u must be >= 1: {u}")
    if history.num_intervals < 1:
        raise DataError(f"connection {history.conn}: empty history")
    return (history.interval_max[-1],) * u


def ingest_predictions(
    path: str,
    u: int,
    scale: float = 1.0,
    expected_conns: set[int] | None = None,
    num_epochs: int | None = None,
) -> dict[int, PredictionMatrix]:
    """Read an external prediction CSV into per-epoch matrices.

    Rows are ``epoch,connection_id,step,gbps`` with steps 1..u; every
    (epoch, connection) pair must supply all u steps exactly once.  Values
    are multiplied by ``scale`` unless a ``# prescaled=true`` comment line
    precedes the header.  When ``expected_conns``/``num_epochs`` are given,
    coverage must match them exactly.
    """
    if u < 1:
        raise ValueError(f"u must be >= 1: {u}")
    flags: dict[str, str] = {}
    cells: dict[tuple[int, int], dict[int, float]] = {}
    try:
        fh = open(path, newline="")
    except FileNotFoundError:
        raise DataError(f"predictions file not found: {path}") from None
    with fh:
        lineno = 0
        header: list[str] | None = None
        for raw in fh:
            lineno += 1
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if header is not None:
                    raise DataError(
                        f"{path}:{lineno}: comment lines must precede the header"
                    )
                body = line[1:].strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    flags[key.strip()] = value.strip()
                continue
            fields = line.split(",")
            if header is None:
                header = fields
                if header != ["epoch", "connection_id", "step", "gbps"]:
                    raise DataError(
                        f"{path}:{lineno}: expected header epoch,connection_id,step,gbps"
                    )
                continue
            if len(fields) != 4:
                raise DataError(
                    f"{path}:{lineno}: expected 4 fields, got {len(fields)}"
                )
            try:
                epoch = int(fields[0])
                conn = int(fields[1])
                step = int(fields[2])
                value = float(fields[3])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric field") from None
            if epoch < 0 or conn < 0:
                raise DataError(f"{path}:{lineno}: negative epoch or connection id")
            if not 1 <= step <= u:
                raise DataError(
                    f"{path}:{lineno}: step {step} outside 1..{u}"
                )
            if value < 0 or not math.isfinite(value):
                raise DataError(f"{path}:{lineno}: bad rate {fields[3]}")
            steps = cells.setdefault((epoch, conn), {})
            if step in steps:
                raise DataError(
                    f"{path}:{lineno}: duplicate step {step} for epoch {epoch} "
                    f"connection {conn}"
                )
            steps[step] = value
    if header is None:
        raise DataError(f"{path}: no header line")
    if not cells:
        raise DataError(f"{path}: no prediction rows")

    prescaled = flags.get("prescaled", "false").lower() == "true"
    factor = 1.0 if prescaled else scale

    epochs = sorted({epoch for epoch, _ in cells})
    if num_epochs is not None and epochs != list(range(num_epochs)):
        raise DataError(
            f"{path}: epochs must cover 0..{num_epochs - 1}, found {epochs}"
        )
    out: dict[int, PredictionMatrix] = {}
    for epoch in epochs:
        conns = sorted(conn for e, conn in cells if e == epoch)
        if expected_conns is not None and set(conns) != expected_conns:
            missing = sorted(expected_conns - set(conns))
            extra = sorted(set(conns) - expected_conns)
            raise DataError(
                f"{path}: epoch {epoch}: connection coverage mismatch "
                f"(missing {missing}, unexpected {extra})"
            )
        rates: dict[int, tuple[float, ...]] = {}
        for conn in conns:
            steps = cells[(epoch, conn)]
            if set(steps) != set(range(1, u + 1)):
                have = sorted(steps)
                raise DataError(
                    f"{path}: epoch {epoch} connection {conn}: steps {have} "
                    f"do not cover 1..{u}"
                )
            rates[conn] = tuple(steps[s] * factor for s in range(1, u + 1))
        out[epoch] = PredictionMatrix(epoch=epoch, horizon=u, rates=rates)
    return out


def export_dataset(
    datasets: list[WindowedDataset],
    out_dir: str,
    tau_minutes: int,
    scale: float,
) -> list[str]:
    """Write one windows CSV per connection plus a manifest; returns the paths.

    Row layout is ``t, x_0..x_{k*r-1}, y_1..y_u``.  The manifest records the
    window geometry (r, u, k, tau) and the demand scaling factor so a
    downstream forecaster can reproduce planner units.
    """
    if not datasets:
        raise ValueError("nothing to export")
    r, u, k = datasets[0].r, datasets[0].u, datasets[0].k
    for ds in datasets:
        if (ds.r, ds.u, ds.k) != (r, u, k):
            raise ValueError("datasets disagree on window geometry")
    os.makedirs(out_dir, exist_ok=True)
    written: list[str] = []
    for ds in sorted(datasets, key=lambda d: d.conn):
        path = os.path.join(out_dir, f"conn_{ds.conn}.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["t"]
                + [f"x_{i}" for i in range(k * r)]
                + [f"y_{j}" for j in range(1, u + 1)]
            )
            for w in ds.windows:
                writer.writerow(
                    [w.t] + [repr(v) for v in w.inputs] + [repr(v) for v in w.targets]
                )
        written.append(path)
    manifest = {
        "r": r,
        "u": u,
        "k": k,
        "tau_minutes": tau_minutes,
        "scale": scale,
        "unit": "gbps",
        "connections": [ds.conn for ds in sorted(datasets, key=lambda d: d.conn)],
    }
    manifest_path = os.path.join(out_dir, "manifest.json")
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(manifest_path)
    return written


def load_dataset(dir_path: str) -> tuple[dict[int, WindowedDataset], dict]:
    """Read back an exported dataset directory; inverse of export_dataset."""
    manifest_path = os.path.join(dir_path, "manifest.json")
    try:
        with open(manifest_path) as fh:
            manifest = json.load(fh)
    except FileNotFoundError:
        raise DataError(f"{dir_path}: missing manifest.json") from None
    r, u, k = manifest["r"], manifest["u"], manifest["k"]
    datasets: dict[int, WindowedDataset] = {}
    for conn in manifest["connections"]:
        path = os.path.join(dir_path, f"conn_{conn}.csv")
        windows = []
        try:
            fh = open(path, newline="")
        except FileNotFoundError:
            raise DataError(f"{dir_path}: missing conn_{conn}.csv") from None
        with fh:
            reader = csv.reader(fh)
            header = next(reader)
            if len(header) != 1 + k * r + u:
                raise DataError(f"{path}: header width disagrees with manifest")
            for row in reader:
                values = [float(v) for v in row]
                windows.append(
                    Window(
                        t=int(values[0]),
                        inputs=tuple(values[1 : 1 + k * r]),
                        targets=tuple(values[1 + k * r :]),
                    )
                )
        datasets[conn] = WindowedDataset(conn, r, u, k, tuple(windows))
    return datasets, manifest
