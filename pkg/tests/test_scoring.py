import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wuiq.ahp import WeightVector
from wuiq.errors import ValidationError
from wuiq.ingest import MetricScores
from wuiq.scoring import (
    EvaluationIteration,
    MissingBaselineError,
    ProjectHistory,
    append_iteration,
    compute_wuiq,
    contributions,
    grade,
    percent_display,
)

GOLDEN_WEIGHTS = WeightVector(np.array([0.36, 0.27, 0.37]))
GOLDEN_SCORES = MetricScores(0.25, 0.97, 0.6184)

unit = st.floats(min_value=0.0, max_value=1.0)


class TestComputeWuiq:
    def test_case_study_value(self):
        value = compute_wuiq(GOLDEN_SCORES, GOLDEN_WEIGHTS)
        assert value == pytest.approx(0.580708, abs=1e-6)
        assert percent_display(value) == "58%"

    def test_equal_weights_give_mean(self):
        w = WeightVector(np.array([1 / 3, 1 / 3, 1 / 3]))
        s = MetricScores(0.3, 0.6, 0.9)
        assert compute_wuiq(s, w) == pytest.approx(0.6, abs=1e-12)

    def test_degenerate_weight_selects_single_metric(self):
        w = WeightVector(np.array([0.0, 1.0, 0.0]))
        assert compute_wuiq(MetricScores(0.1, 0.8, 0.3), w) == pytest.approx(0.8)

    @given(unit, unit, unit, st.lists(st.floats(0.01, 1.0), min_size=3, max_size=3))
    @settings(max_examples=150, deadline=None)
    def test_convex_combination_bounds(self, p, a, u, raw_w):
        w = WeightVector(np.array(raw_w) / np.sum(raw_w))
        s = MetricScores(p, a, u)
        value = compute_wuiq(s, w)
        assert min(p, a, u) - 1e-12 <= value <= max(p, a, u) + 1e-12

    def test_contributions_sum_to_total(self):
        c = contributions(GOLDEN_SCORES, GOLDEN_WEIGHTS)
        assert sum(c.values()) == pytest.approx(
            compute_wuiq(GOLDEN_SCORES, GOLDEN_WEIGHTS), abs=1e-12
        )
        assert c["performance"] == pytest.approx(0.25 * 0.36)


class TestIterations:
    def test_indices_start_at_one_and_increase(self):
        history = ProjectHistory("p", baseline_weights=GOLDEN_WEIGHTS)
        history = append_iteration(history, GOLDEN_SCORES, "t1")
        history = append_iteration(history, MetricScores(0.5, 0.5, 0.5), "t2")
        assert [it.t for it in history.iterations] == [1, 2]

    def test_baseline_weights_reused_for_every_iteration(self):
        history = ProjectHistory("p", baseline_weights=GOLDEN_WEIGHTS)
        history = append_iteration(history, GOLDEN_SCORES)
        history = append_iteration(history, MetricScores(0.9, 0.9, 0.9))
        for it in history.iterations:
            assert it.weights is GOLDEN_WEIGHTS

    def test_appending_without_baseline_fails(self):
        history = ProjectHistory("p")
        with pytest.raises(MissingBaselineError):
            append_iteration(history, GOLDEN_SCORES)

    def test_stored_score_must_match_inputs(self):
        with pytest.raises(ValidationError):
            EvaluationIteration(
                t=1, scores=GOLDEN_SCORES, weights=GOLDEN_WEIGHTS,
                wuiq=0.9, evaluated_at="t",
            )

    def test_index_must_be_positive(self):
        with pytest.raises(ValidationError):
            EvaluationIteration(
                t=0, scores=GOLDEN_SCORES, weights=GOLDEN_WEIGHTS,
                wuiq=compute_wuiq(GOLDEN_SCORES, GOLDEN_WEIGHTS),
            )

    def test_history_rejects_gapped_indices(self):
        it1 = EvaluationIteration(
            t=2, scores=GOLDEN_SCORES, weights=GOLDEN_WEIGHTS,
            wuiq=compute_wuiq(GOLDEN_SCORES, GOLDEN_WEIGHTS),
        )
        with pytest.raises(ValidationError):
            ProjectHistory("p", baseline_weights=GOLDEN_WEIGHTS, iterations=(it1,))


class TestGrades:
    @pytest.mark.parametrize("value,label", [
        (0.0, "requires improvement"),
        (0.59999, "requires improvement"),
        (0.60, "fair"),
        (0.74999, "fair"),
        (0.75, "good"),
        (0.89999, "good"),
        (0.90, "excellent"),
        (1.0, "excellent"),
    ])
    def test_default_bands_closed_on_the_left(self, value, label):
        assert grade(value) == label

    def test_case_study_band(self):
        assert grade(0.580708) == "requires improvement"

    def test_custom_edges(self):
        assert grade(0.55, edges=(0.5, 0.7, 0.9)) == "fair"

    def test_out_of_range_rejected(self):
        with pytest.raises(ValidationError):
            grade(1.2)

    def test_unordered_edges_rejected(self):
        with pytest.raises(ValidationError):
            grade(0.5, edges=(0.9, 0.7, 0.5))


class TestPercentDisplay:
    @pytest.mark.parametrize("value,rendered", [
        (0.580708, "58%"),
        (0.0, "0%"),
        (1.0, "100%"),
        (0.615, "62%"),
        (0.995, "100%"),
    ])
    def test_rounding_to_whole_percent(self, value, rendered):
        assert percent_display(value) == rendered
