"""Tests for cuesync.measures module."""

import numpy as np
import pytest

from cuesync.annot_io import Hearing, PhoneInterval
from cuesync.errors import DuplicateSentenceError, SchemaViolationError
from cuesync.measures import (
    MEASURE_COLUMNS,
    LviConvention,
    LviSource,
    MeasureTable,
    Subset,
    assemble_table,
    compute_measures,
    midpoint,
)
from tests.conftest import make_timeline


class TestMidpoint:
    """Tests for midpoint function."""

    def test_mean_of_bounds(self):
        assert midpoint(PhoneInterval(0.2, 0.4, "a")) == pytest.approx(0.3)

    def test_narrow_interval(self):
        iv = PhoneInterval(1.0, 1.0 + 1e-6, "a")
        assert iv.start < midpoint(iv) < iv.end


class TestComputeMeasures:
    """Tests for compute_measures function."""

    def test_three_vowels(self, sample_timeline):
        m = compute_measures(sample_timeline)

        assert [v.index for v in m] == [0, 1, 2]
        assert [v.t_mid for v in m] == pytest.approx([0.6, 1.0, 1.45])
        assert [v.T_mid for v in m] == pytest.approx([0.3, 0.7, 1.1])
        assert [v.hpt for v in m] == pytest.approx([0.3, 0.3, 0.35])
        assert [v.lve for v in m] == pytest.approx([1.0, 0.6, 0.15])
        assert [v.lvd for v in m] == pytest.approx([0.2, 0.2, 0.3])

    def test_backward_lvi_imputes_first(self, sample_timeline):
        m = compute_measures(sample_timeline)

        assert [v.lvi for v in m] == pytest.approx([0.45, 0.4, 0.45])
        assert [v.lvi_source for v in m] == [
            LviSource.IMPUTED_MAX,
            LviSource.MEASURED,
            LviSource.MEASURED,
        ]

    def test_forward_lvi_imputes_last(self, sample_timeline):
        m = compute_measures(sample_timeline, LviConvention.FORWARD)

        assert [v.lvi for v in m] == pytest.approx([0.4, 0.45, 0.45])
        assert m[-1].lvi_source is LviSource.IMPUTED_MAX

    def test_single_vowel_uses_duration(self):
        timeline = make_timeline(lip=[(0.5, 0.8, "a")], hand=[(0.1, 0.3)])

        (m,) = compute_measures(timeline)

        assert m.lvi == pytest.approx(0.3)
        assert m.lvi_source is LviSource.IMPUTED_SINGLETON
        assert m.lve == pytest.approx(0.15)

    def test_lve_positive_and_hand_can_lag(self):
        timeline = make_timeline(
            lip=[(0.5, 0.7, "a"), (0.9, 1.0, "o")], hand=[(0.7, 0.9), (1.0, 1.2)]
        )

        m = compute_measures(timeline)

        assert all(v.lve > 0 for v in m)
        assert m[0].hpt == pytest.approx(-0.2)

    def test_lve_equals_end_minus_mid(self, small_corpus):
        for timeline in small_corpus.timelines[:10]:
            for v in compute_measures(timeline):
                assert v.lve == pytest.approx(timeline.sentence_end - v.t_mid)
                assert v.lve > 0

    def test_hpt_recovers_lip_instant(self, small_table):
        frame = small_table.frame

        gap = frame["hpt_s"] + frame["T_mid_s"] - frame["t_mid_s"]

        assert gap.abs().max() < 1e-12


class TestAssembleTable:
    """Tests for assemble_table and MeasureTable."""

    def test_rows_sorted(self, sample_timeline):
        later = make_timeline(lip=[(0.4, 0.6, "e")], hand=[(0.1, 0.3)], sentence_id="s000")

        table = assemble_table([sample_timeline, later])

        assert list(table.frame.columns) == MEASURE_COLUMNS
        assert table.frame["sentence_id"].tolist() == ["s000", "s001", "s001", "s001"]
        assert table.frame["index"].tolist() == [0, 0, 1, 2]

    def test_duplicate_sentence(self, sample_timeline):
        with pytest.raises(DuplicateSentenceError):
            assemble_table([sample_timeline, sample_timeline])

    def test_rows_round_trip(self, sample_timeline):
        table = assemble_table([sample_timeline])
        assert table.rows() == compute_measures(sample_timeline)

    def test_subsets(self, sample_timeline):
        deaf = make_timeline(
            lip=[(0.4, 0.6, "e")], hand=[(0.1, 0.3)], cuer_id="DF1", hearing=Hearing.DEAF
        )
        table = assemble_table([sample_timeline, deaf])

        assert len(table.subset(Subset.ALL)) == 4
        assert len(table.subset("NORMAL")) == 3
        assert table.subset(Subset.DEAF).frame["cuer_id"].tolist() == ["DF1"]
        assert table.syllable_counts() == {"DF1": 1, "NF1": 3}

    def test_select_sentences(self, small_table):
        keys = small_table.sentence_keys()[:3]

        selected = small_table.select_sentences(keys)

        assert selected.sentence_keys() == keys

    def test_sentence_means(self, sample_timeline):
        table = assemble_table([sample_timeline])

        alpha_bar, beta_bar = table.sentence_means()

        assert np.allclose(alpha_bar, (0.45 + 0.4 + 0.45) / 3)
        assert np.allclose(beta_bar, (0.2 + 0.2 + 0.3) / 3)


class TestMeasureTableCsv:
    """Tests for MeasureTable CSV export and import."""

    def test_round_trip(self, small_table):
        text = "# cuesync 1.0.0 config=000000000000\n" + small_table.to_csv()

        again = MeasureTable.from_csv(text)

        assert again.rows() == small_table.rows()

    def test_missing_column(self, small_table):
        text = small_table.frame.drop(columns=["lvd_s"]).to_csv(index=False)
        with pytest.raises(SchemaViolationError):
            MeasureTable.from_csv(text)

    def test_empty_text(self):
        with pytest.raises(SchemaViolationError):
            MeasureTable.from_csv("")

    def test_numeric_looking_ids_stay_strings(self):
        timeline = make_timeline(
            lip=[(0.4, 0.6, "e")], hand=[(0.1, 0.3)], sentence_id="007", cuer_id="12"
        )

        again = MeasureTable.from_csv(assemble_table([timeline]).to_csv())

        assert again.sentence_keys() == [("12", "007")]
