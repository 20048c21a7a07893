"""Trace parsing, intervalization, window building, and prediction ingest."""

from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eonplan.errors import DataError
from eonplan.traffic import (
    FluctuationSeries,
    PredictionMatrix,
    export_dataset,
    ingest_predictions,
    intervalize,
    load_dataset,
    make_windows,
    naive_predict,
    read_trace,
)


def write_trace(path, samples, unit="gbps"):
    with open(path, "w") as fh:
        fh.write(f"connection_id,sample_index,{unit}\n")
        for conn in samples:
            for i, v in enumerate(samples[conn]):
                fh.write(f"{conn},{i},{v!r}\n")


class TestReadTrace:
    def test_gbps_passthrough(self, tmp_path):
        p = tmp_path / "t.csv"
        write_trace(p, {0: [1.5, 2.0], 3: [0.25]})
        out = read_trace(str(p))
        assert set(out) == {0, 3}
        assert out[0].samples == (1.5, 2.0)
        assert out[3].samples == (0.25,)

    def test_mbps_converts_to_gbps(self, tmp_path):
        p = tmp_path / "t.csv"
        write_trace(p, {0: [1500.0, 250.0]}, unit="mbps")
        assert read_trace(str(p))[0].samples == (1.5, 0.25)

    def test_rows_any_order(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text(
            "connection_id,sample_index,gbps\n0,1,2.0\n0,0,1.0\n"
        )
        assert read_trace(str(p))[0].samples == (1.0, 2.0)

    def test_unknown_unit(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("connection_id,sample_index,tbps\n0,0,1\n")
        with pytest.raises(DataError, match="mbps or gbps"):
            read_trace(str(p))

    def test_gap_in_indices(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("connection_id,sample_index,gbps\n0,0,1.0\n0,2,2.0\n")
        with pytest.raises(DataError, match="0..n-1"):
            read_trace(str(p))

    def test_duplicate_sample(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("connection_id,sample_index,gbps\n0,0,1.0\n0,0,2.0\n")
        with pytest.raises(DataError, match="duplicate"):
            read_trace(str(p))

    def test_negative_rate_with_line_number(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("connection_id,sample_index,gbps\n0,0,1.0\n0,1,-2\n")
        with pytest.raises(DataError, match=":3"):
            read_trace(str(p))

    def test_empty_file(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("")
        with pytest.raises(DataError, match="empty"):
            read_trace(str(p))


class TestIntervalize:
    def test_groups_and_maxima(self):
        s = FluctuationSeries(0, (1.0, 5.0, 2.0, 3.0, 4.0, 4.0))
        iv = intervalize(s, 10)  # 2 samples per interval
        assert iv.k == 2
        assert iv.intervals == ((1.0, 5.0), (2.0, 3.0), (4.0, 4.0))
        assert iv.interval_max == (5.0, 3.0, 4.0)

    def test_trailing_partial_interval_dropped(self):
        s = FluctuationSeries(0, (1.0, 2.0, 3.0, 4.0, 5.0))
        iv = intervalize(s, 10)
        assert iv.num_intervals == 2
        assert iv.interval_max == (2.0, 4.0)

    def test_tau_five_is_identity_grouping(self):
        s = FluctuationSeries(0, (1.0, 2.0))
        iv = intervalize(s, 5)
        assert iv.k == 1
        assert iv.interval_max == (1.0, 2.0)

    def test_tau_must_be_multiple_of_cadence(self):
        with pytest.raises(ValueError):
            intervalize(FluctuationSeries(0, (1.0,)), 7)

    def test_too_few_samples(self):
        with pytest.raises(DataError):
            intervalize(FluctuationSeries(0, (1.0,)), 10)

    @given(
        values=st.lists(st.floats(0, 1e3), min_size=1, max_size=60),
        k=st.integers(1, 6),
    )
    def test_max_is_max_of_each_group(self, values, k):
        if len(values) < k:
            return
        iv = intervalize(FluctuationSeries(0, tuple(values)), 5 * k)
        assert iv.num_intervals == len(values) // k
        for j, group in enumerate(iv.intervals):
            assert group == tuple(values[j * k : (j + 1) * k])
            assert iv.interval_max[j] == max(group)

    @given(
        values=st.lists(st.floats(0.01, 1e3), min_size=4, max_size=40),
        factor=st.floats(0.1, 50),
    )
    def test_scaling_samples_scales_maxima(self, values, factor):
        base = intervalize(FluctuationSeries(0, tuple(values)), 10)
        scaled = intervalize(
            FluctuationSeries(0, tuple(v * factor for v in values)), 10
        )
        for a, b in zip(base.interval_max, scaled.interval_max):
            assert b == pytest.approx(a * factor)


class TestMakeWindows:
    def _series(self, n, k=2):
        samples = tuple(float(i) for i in range(n * k))
        return intervalize(FluctuationSeries(0, samples), 5 * k)

    def test_window_count(self):
        # T intervals, r inputs, u targets -> T - r - u + 1 windows.
        ds = make_windows(self._series(12), r=4, u=2)
        assert len(ds.windows) == 12 - 4 - 2 + 1

    def test_first_and_last_window_alignment(self):
        series = self._series(8, k=2)
        ds = make_windows(series, r=3, u=2)
        first, last = ds.windows[0], ds.windows[-1]
        assert first.t == 2  # earliest t with r intervals of history
        assert last.t == 8 - 2 - 1  # latest t leaving u future intervals
        want = []
        for iv in series.intervals[0:3]:
            want.extend(iv)
        assert first.inputs == tuple(want)
        assert first.targets == series.interval_max[3:5]
        assert last.targets == series.interval_max[6:8]

    def test_exactly_one_window_at_minimum_length(self):
        ds = make_windows(self._series(5), r=3, u=2)
        assert len(ds.windows) == 1

    def test_too_short_series(self):
        with pytest.raises(DataError, match="at least"):
            make_windows(self._series(4), r=3, u=2)

    def test_bad_geometry(self):
        with pytest.raises(ValueError):
            make_windows(self._series(6), r=0, u=1)

    @given(
        n=st.integers(3, 30),
        r=st.integers(1, 6),
        u=st.integers(1, 6),
        k=st.integers(1, 3),
    )
    def test_count_and_shapes_always_agree(self, n, r, u, k):
        if n < r + u:
            return
        ds = make_windows(self._series(n, k), r, u)
        assert len(ds.windows) == n - r - u + 1
        for w in ds.windows:
            assert len(w.inputs) == k * r
            assert len(w.targets) == u


class TestNaivePredict:
    def test_repeats_last_interval_max(self):
        # Grouping is (1,9), (4,2): the newest interval peaks at 4.0.
        iv = intervalize(FluctuationSeries(0, (1.0, 9.0, 4.0, 2.0)), 10)
        assert iv.interval_max[-1] == 4.0
        assert naive_predict(iv, 3) == (4.0, 4.0, 4.0)
        assert naive_predict(iv, 1) == (4.0,)

    def test_u_must_be_positive(self):
        iv = intervalize(FluctuationSeries(0, (1.0,)), 5)
        with pytest.raises(ValueError):
            naive_predict(iv, 0)


def write_predictions(path, rows, header=True, comments=()):
    with open(path, "w") as fh:
        for c in comments:
            fh.write(c + "\n")
        if header:
            fh.write("epoch,connection_id,step,gbps\n")
        for row in rows:
            fh.write(",".join(str(x) for x in row) + "\n")


class TestIngestPredictions:
    def test_round_trip_with_scale(self, tmp_path):
        p = tmp_path / "pred.csv"
        write_predictions(
            p,
            [
                (0, 0, 1, 1.0),
                (0, 0, 2, 2.0),
                (0, 7, 1, 3.0),
                (0, 7, 2, 4.0),
                (1, 0, 1, 5.0),
                (1, 0, 2, 6.0),
                (1, 7, 1, 7.0),
                (1, 7, 2, 8.0),
            ],
        )
        out = ingest_predictions(str(p), u=2, scale=30.0)
        assert sorted(out) == [0, 1]
        assert out[0].rates[0] == (30.0, 60.0)
        assert out[1].rates[7] == (210.0, 240.0)
        assert out[0].horizon == 2
        assert out[0].connections() == [0, 7]

    def test_prescaled_flag_suppresses_scale(self, tmp_path):
        p = tmp_path / "pred.csv"
        write_predictions(
            p, [(0, 0, 1, 42.0)], comments=["# prescaled=true"]
        )
        out = ingest_predictions(str(p), u=1, scale=30.0)
        assert out[0].rates[0] == (42.0,)

    def test_missing_step_names_epoch_and_connection(self, tmp_path):
        p = tmp_path / "pred.csv"
        write_predictions(p, [(0, 0, 1, 1.0), (0, 0, 2, 1.0), (0, 1, 1, 1.0)])
        with pytest.raises(DataError, match="epoch 0 connection 1"):
            ingest_predictions(str(p), u=2)

    def test_step_out_of_range_has_line_number(self, tmp_path):
        p = tmp_path / "pred.csv"
        write_predictions(p, [(0, 0, 3, 1.0)])
        with pytest.raises(DataError, match=":2.*step 3"):
            ingest_predictions(str(p), u=2)

    def test_duplicate_step(self, tmp_path):
        p = tmp_path / "pred.csv"
        write_predictions(p, [(0, 0, 1, 1.0), (0, 0, 1, 2.0)])
        with pytest.raises(DataError, match="duplicate step"):
            ingest_predictions(str(p), u=2)

    def test_epoch_coverage_check(self, tmp_path):
        p = tmp_path / "pred.csv"
        write_predictions(p, [(0, 0, 1, 1.0), (2, 0, 1, 1.0)])
        with pytest.raises(DataError, match="epochs must cover"):
            ingest_predictions(str(p), u=1, num_epochs=3)

    def test_connection_coverage_check(self, tmp_path):
        p = tmp_path / "pred.csv"
        write_predictions(p, [(0, 0, 1, 1.0)])
        with pytest.raises(DataError, match="coverage mismatch"):
            ingest_predictions(str(p), u=1, expected_conns={0, 1})

    def test_wrong_header(self, tmp_path):
        p = tmp_path / "pred.csv"
        p.write_text("epoch,conn,step,gbps\n0,0,1,1.0\n")
        with pytest.raises(DataError, match="expected header"):
            ingest_predictions(str(p), u=1)

    def test_bad_value_rejected(self, tmp_path):
        p = tmp_path / "pred.csv"
        write_predictions(p, [(0, 0, 1, "nan")])
        with pytest.raises(DataError, match="bad rate"):
            ingest_predictions(str(p), u=1)

    def test_matrix_connections_sorted(self):
        m = PredictionMatrix(epoch=0, horizon=1, rates={5: (1.0,), 2: (2.0,)})
        assert m.connections() == [2, 5]


class TestDatasetRoundTrip:
    def test_export_then_load(self, tmp_path):
        series = [
            intervalize(
                FluctuationSeries(c, tuple(float(c * 100 + i) for i in range(12))), 10
            )
            for c in (0, 1)
        ]
        datasets = [make_windows(s, r=2, u=2) for s in series]
        out = tmp_path / "ds"
        written = export_dataset(datasets, str(out), tau_minutes=10, scale=30.0)
        assert sorted(p.split("/")[-1] for p in written) == [
            "conn_0.csv",
            "conn_1.csv",
            "manifest.json",
        ]
        loaded, manifest = load_dataset(str(out))
        assert manifest["r"] == 2 and manifest["u"] == 2 and manifest["k"] == 2
        assert manifest["scale"] == 30.0
        assert manifest["unit"] == "gbps"
        assert manifest["connections"] == [0, 1]
        for c in (0, 1):
            assert loaded[c].windows == datasets[c].windows

    def test_mixed_geometry_rejected(self, tmp_path):
        s = intervalize(FluctuationSeries(0, tuple(map(float, range(12)))), 10)
        with pytest.raises(ValueError, match="geometry"):
            export_dataset(
                [make_windows(s, 2, 2), make_windows(s, 3, 2)],
                str(tmp_path / "ds"),
                tau_minutes=10,
                scale=1.0,
            )

    def test_load_without_manifest(self, tmp_path):
        with pytest.raises(DataError, match="manifest"):
            load_dataset(str(tmp_path))

    @settings(max_examples=25, deadline=None)
    @given(
        n=st.integers(6, 16),
        r=st.integers(1, 3),
        u=st.integers(1, 3),
        seed=st.integers(0, 1000),
    )
    def test_round_trip_is_lossless(self, tmp_path_factory, n, r, u, seed):
        import random as _random

        if n < r + u:
            return
        rng = _random.Random(seed)
        samples = tuple(rng.uniform(0, 500) for _ in range(2 * n))
        ds = make_windows(intervalize(FluctuationSeries(0, samples), 10), r, u)
        out = tmp_path_factory.mktemp("ds")
        export_dataset([ds], str(out), tau_minutes=10, scale=30.0)
        loaded, _ = load_dataset(str(out))
        assert loaded[0] == ds
