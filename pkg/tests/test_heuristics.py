"""Selection policies and the first-fit provisioning epoch."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eonplan.heuristics import provision_epoch, select_mad, select_mmd
from eonplan.spectrum import ActionKind, NetworkState, validate
from eonplan.traffic import PredictionMatrix

from conftest import fab_path, rate_for_width

# Four connections, four look-ahead steps.  Per-connection maxima are
# (6, 5, 6, 5); column sums are (14, 17, 14, 11), so the aggregate peaks at
# step 2 (unique), whose column is (5, 4, 5, 3).
REFERENCE_RATES = {
    1: (6.0, 5.0, 2.0, 1.0),
    2: (2.0, 4.0, 5.0, 3.0),
    3: (4.0, 5.0, 6.0, 2.0),
    4: (2.0, 3.0, 1.0, 5.0),
}
REFERENCE = PredictionMatrix(epoch=0, horizon=4, rates=REFERENCE_RATES)


class TestSelectMmd:
    def test_reference_matrix(self):
        sel = select_mmd(REFERENCE)
        assert sel.rates == {1: 6.0, 2: 5.0, 3: 6.0, 4: 5.0}
        assert sel.chosen_interval is None

    def test_source_steps_are_earliest_maximizers(self):
        sel = select_mmd(REFERENCE)
        assert sel.source_step == {1: 1, 2: 3, 3: 3, 4: 4}

    def test_tie_takes_earliest_step(self):
        pred = PredictionMatrix(0, 3, {0: (5.0, 5.0, 1.0)})
        assert select_mmd(pred).source_step[0] == 1

    @given(
        rows=st.dictionaries(
            st.integers(0, 5),
            st.tuples(*([st.floats(0, 100)] * 3)),
            min_size=1,
            max_size=6,
        )
    )
    def test_each_rate_is_its_rows_maximum(self, rows):
        sel = select_mmd(PredictionMatrix(0, 3, rows))
        for conn, row in rows.items():
            assert sel.rates[conn] == max(row)


class TestSelectMad:
    def test_reference_matrix(self):
        sel = select_mad(REFERENCE)
        assert sel.chosen_interval == 2
        assert sel.rates == {1: 5.0, 2: 4.0, 3: 5.0, 4: 3.0}
        assert set(sel.source_step.values()) == {2}

    def test_aggregate_value(self):
        sel = select_mad(REFERENCE)
        assert sum(sel.rates.values()) == 17.0

    def test_tie_takes_earliest_interval(self):
        pred = PredictionMatrix(0, 2, {0: (3.0, 1.0), 1: (1.0, 3.0)})
        sel = select_mad(pred)  # both columns sum to 4
        assert sel.chosen_interval == 1

    @given(
        rows=st.dictionaries(
            st.integers(0, 5),
            st.tuples(*([st.floats(0, 100)] * 4)),
            min_size=1,
            max_size=5,
        )
    )
    def test_chosen_column_has_maximal_sum(self, rows):
        sel = select_mad(PredictionMatrix(0, 4, rows))
        i = sel.chosen_interval - 1
        sums = [sum(rows[c][j] for c in rows) for j in range(4)]
        assert sums[i] == max(sums)
        for conn in rows:
            assert sel.rates[conn] == rows[conn][i]


class TestHorizonOne:
    """With u=1 both policies collapse to the single predicted step."""

    @settings(max_examples=200)
    @given(
        rows=st.dictionaries(
            st.integers(0, 8),
            st.tuples(st.floats(0, 500)),
            min_size=1,
            max_size=8,
        )
    )
    def test_selections_are_bit_identical(self, rows):
        pred = PredictionMatrix(0, 1, rows)
        mmd, mad = select_mmd(pred), select_mad(pred)
        assert mmd.rates == mad.rates
        assert mmd.source_step == mad.source_step
        assert mad.chosen_interval == 1


class TestMatrixValidation:
    def test_empty_matrix(self):
        with pytest.raises(ValueError, match="empty"):
            select_mmd(PredictionMatrix(0, 1, {}))

    def test_row_length_mismatch(self):
        with pytest.raises(ValueError, match="horizon"):
            select_mad(PredictionMatrix(0, 3, {0: (1.0, 2.0)}))

    def test_negative_rate(self):
        with pytest.raises(ValueError, match="negative"):
            select_mmd(PredictionMatrix(0, 2, {0: (1.0, -0.5)}))


class TestProvisionEpoch:
    def test_order_is_descending_rate_then_ascending_id(self):
        # One slot-1 link: whoever goes first wins the low slots.
        state = NetworkState(1, 10)
        path = fab_path(0, (0,))
        cands = {0: [path], 1: [path], 2: [path]}
        sel_rates = {0: rate_for_width(2), 1: rate_for_width(3), 2: rate_for_width(2)}
        sel = select_mmd(
            PredictionMatrix(0, 1, {c: (r,) for c, r in sel_rates.items()})
        )
        report = provision_epoch(state, sel, cands, 10.5)
        # Connection 1 (widest) first, then 0 and 2 (equal rate, id order).
        assert [o.new.conn for o in report.outcomes] == [1, 0, 2]
        assert state.allocation(1).start == 0
        assert state.allocation(0).start == 3
        assert state.allocation(2).start == 5

    def test_zero_rate_still_holds_one_slot(self):
        state = NetworkState(1, 4)
        sel = select_mmd(PredictionMatrix(0, 1, {0: (0.0,)}))
        report = provision_epoch(state, sel, {0: [fab_path(0, (0,))]}, 10.5)
        assert report.outcomes[0].new.width == 1

    def test_widths_follow_each_paths_modulation(self):
        # 100 Gbps: QPSK path needs 5 slots, 16QAM path only 3.
        state = NetworkState(2, 4)  # too tight for the QPSK width
        qpsk = fab_path(0, (0,), "QPSK")
        qam16 = fab_path(1, (1,), "16QAM")
        sel = select_mmd(PredictionMatrix(0, 1, {0: (100.0,)}))
        report = provision_epoch(state, sel, {0: [qpsk, qam16]}, 10.5)
        out = report.outcomes[0]
        assert out.kind is ActionKind.PLACED
        assert out.new.path == qam16 and out.new.width == 3

    def test_counts_and_blocked(self):
        state = NetworkState(1, 4)
        path = fab_path(0, (0,))
        sel = select_mmd(
            PredictionMatrix(
                0, 1, {0: (rate_for_width(3),), 1: (rate_for_width(3),)}
            )
        )
        report = provision_epoch(state, sel, {0: [path], 1: [path]}, 10.5)
        assert report.count(ActionKind.PLACED) == 1
        assert report.blocked == 1
        assert report.disruptions == 0
        assert validate(state) == []

    def test_missing_candidates_rejected(self):
        state = NetworkState(1, 4)
        sel = select_mmd(PredictionMatrix(0, 1, {0: (1.0,), 1: (1.0,)}))
        with pytest.raises(ValueError, match="without candidate"):
            provision_epoch(state, sel, {0: [fab_path(0, (0,))]}, 10.5)
