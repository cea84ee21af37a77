import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_items, make_response, random_items
from wuiq.errors import ConfigurationError, ValidationError
from wuiq.usability import (
    EXTENDED_ITEMS,
    ITEM_COUNT,
    NEGATIVE_ITEMS,
    POSITIVE_ITEMS,
    U_CHECK_MAX,
    LexiconScorer,
    SentimentScore,
    SurveyResponse,
    UsabilityScore,
    get_scorer,
    preprocess_text,
    questionnaire,
    register_scorer,
    sentiment_score,
    softmax,
    sus_extended_score,
    to_percent_display,
    usability_aggregate,
)

likert = st.integers(min_value=1, max_value=5)


class TestSurveyResponse:
    def test_valid_response(self):
        r = make_response()
        assert r.item(1) == 3
        assert len(r.items) == ITEM_COUNT

    def test_item_roles_partition_the_questionnaire(self):
        assert sorted(POSITIVE_ITEMS + NEGATIVE_ITEMS + EXTENDED_ITEMS) == \
            list(range(1, ITEM_COUNT + 1))

    def test_wrong_item_count(self):
        with pytest.raises(ValidationError, match="17"):
            SurveyResponse("r1", (3,) * 16, "ok")

    @pytest.mark.parametrize("bad", [0, 6, -1, 2.5, "3", True])
    def test_out_of_scale_item(self, bad):
        items = list(make_items())
        items[4] = bad
        with pytest.raises(ValidationError):
            SurveyResponse("r1", tuple(items), "ok")

    def test_review_is_mandatory(self):
        with pytest.raises(ValidationError, match="review"):
            SurveyResponse("r1", make_items(), "")
        with pytest.raises(ValidationError, match="review"):
            SurveyResponse("r1", make_items(), "   ")

    def test_negative_duration_rejected(self):
        with pytest.raises(ValidationError):
            make_response(duration=-1.0)

    def test_empty_respondent_id_rejected(self):
        with pytest.raises(ValidationError):
            SurveyResponse("", make_items(), "ok")


class TestSoftmax:
    def test_outputs_sum_to_one(self):
        p = softmax([1.0, 2.0, 3.0])
        assert p.sum() == pytest.approx(1.0, abs=1e-12)

    def test_shift_invariance(self):
        a = softmax([1.0, 4.0])
        b = softmax([1001.0, 1004.0])
        np.testing.assert_allclose(a, b, atol=1e-12)

    def test_two_logit_hand_value(self):
        p = softmax([math.log(2), 0.0])
        np.testing.assert_allclose(p, [2 / 3, 1 / 3], atol=1e-12)

    def test_extreme_logits_do_not_overflow(self):
        p = softmax([1000.0, -1000.0])
        assert p[0] == pytest.approx(1.0)
        assert np.isfinite(p).all()

    def test_empty_input_is_an_error(self):
        with pytest.raises(ValidationError):
            softmax([])

    @given(st.lists(st.floats(-50, 50), min_size=1, max_size=6))
    @settings(max_examples=100, deadline=None)
    def test_always_a_distribution(self, logits):
        p = softmax(logits)
        assert abs(p.sum() - 1.0) < 1e-12
        assert (p >= 0).all()


class TestSentiment:
    def test_preprocess_lowercases_and_strips_punctuation(self):
        assert preprocess_text("Great, EASY to use!") == \
            ["great", "easy", "to", "use"]

    def test_empty_text_scores_half(self):
        assert sentiment_score("").value == 0.5

    def test_balanced_text_scores_half(self):
        scorer = LexiconScorer(positive={"good"}, negative={"bad"})
        assert scorer.score("good bad").value == 0.5

    def test_two_positive_hits_hand_value(self):
        s = sentiment_score("great and easy")
        assert s.value == pytest.approx(math.exp(2) / (math.exp(2) + 1), abs=1e-9)
        assert s.value == pytest.approx(0.8808, abs=5e-4)

    def test_negative_text_scores_below_half(self):
        assert sentiment_score("slow and confusing and broken").value < 0.5

    def test_score_always_in_unit_interval(self):
        for text in ("", "great", "awful " * 50, "x y z unknown words"):
            assert 0.0 <= sentiment_score(text).value <= 1.0

    def test_unknown_scorer_name(self):
        with pytest.raises(ConfigurationError, match="unknown"):
            get_scorer("cnn")

    def test_custom_scorer_registration(self):
        class Fixed:
            def score(self, text):
                return SentimentScore(0.75)

        register_scorer("fixed", Fixed)
        assert sentiment_score("anything", "fixed").value == 0.75

    def test_sentiment_score_bounds_enforced(self):
        with pytest.raises(ValidationError):
            SentimentScore(1.5)


class TestPerUserScore:
    def test_minimum(self):
        r = make_response(odd=1, even=5, extended=1)
        u = sus_extended_score(r, SentimentScore(0.0))
        assert u.u_check == pytest.approx(0.0, abs=1e-12)

    def test_maximum(self):
        r = make_response(odd=5, even=1, extended=5)
        u = sus_extended_score(r, SentimentScore(1.0))
        assert u.u_check == pytest.approx(260.1 / 3.5, abs=1e-9)
        assert u.u_check == pytest.approx(74.3143, abs=5e-4)

    def test_all_threes_midpoint(self):
        r = make_response(odd=3, even=3, extended=3)
        u = sus_extended_score(r, SentimentScore(0.5))
        assert u.u_check == pytest.approx(130.05 / 3.5, abs=1e-9)
        assert u.u_check == pytest.approx(37.1571, abs=5e-4)

    def test_positive_item_sensitivity(self):
        base = sus_extended_score(make_response(), SentimentScore(0.5)).u_check
        items = list(make_items())
        items[0] += 1  # uq_1
        bumped = sus_extended_score(
            SurveyResponse("r1", tuple(items), "fine overall"), SentimentScore(0.5)
        ).u_check
        assert bumped - base == pytest.approx(5 / 3.5, abs=1e-12)

    def test_extended_item_sensitivity(self):
        items = list(make_items())
        items[16] += 1  # uq_17
        base = sus_extended_score(make_response(), SentimentScore(0.5)).u_check
        bumped = sus_extended_score(
            SurveyResponse("r1", tuple(items), "fine overall"), SentimentScore(0.5)
        ).u_check
        assert bumped - base == pytest.approx(5 / 3.5, abs=1e-12)

    def test_negative_item_sensitivity(self):
        items = list(make_items())
        items[1] += 1  # uq_2
        base = sus_extended_score(make_response(), SentimentScore(0.5)).u_check
        bumped = sus_extended_score(
            SurveyResponse("r1", tuple(items), "fine overall"), SentimentScore(0.5)
        ).u_check
        assert bumped - base == pytest.approx(-1 / 3.5, abs=1e-12)

    def test_sentiment_sensitivity(self):
        lo = sus_extended_score(make_response(), SentimentScore(0.2)).u_check
        hi = sus_extended_score(make_response(), SentimentScore(0.9)).u_check
        assert hi - lo == pytest.approx(0.7 / 35, abs=1e-12)

    @given(st.lists(likert, min_size=17, max_size=17), st.floats(0, 1))
    @settings(max_examples=200, deadline=None)
    def test_bounds_hold_everywhere(self, items, s):
        r = SurveyResponse("r1", tuple(items), "ok")
        u = sus_extended_score(r, SentimentScore(s))
        assert -1e-9 <= u.u_check <= U_CHECK_MAX + 1e-9

    def test_determinism(self):
        rng = np.random.default_rng(3)
        r = SurveyResponse("r1", random_items(rng), "some review text")
        s = SentimentScore(0.437)
        assert sus_extended_score(r, s).u_check == sus_extended_score(r, s).u_check


class TestAggregate:
    def _scores(self, values):
        return [UsabilityScore(f"r{i}", v) for i, v in enumerate(values)]

    def test_equal_values(self):
        assert usability_aggregate(self._scores([50.0, 50.0])) == pytest.approx(0.5)

    def test_forty_ninety_hand_value(self):
        # Bare values are accepted; 90 exceeds the survey formula's range
        # but the geometric mean itself is defined for any non-negatives.
        u = usability_aggregate([40.0, 90.0])
        assert u == pytest.approx(0.60, abs=1e-12)

    def test_rejects_negative_bare_values(self):
        with pytest.raises(ValidationError):
            usability_aggregate([40.0, -1.0])

    def test_zero_short_circuits(self):
        assert usability_aggregate(self._scores([0.0, 70.0, 70.0])) == 0.0

    def test_empty_is_an_error(self):
        with pytest.raises(ValidationError):
            usability_aggregate([])

    def test_permutation_invariance(self):
        values = [12.5, 33.0, 71.2, 44.4]
        a = usability_aggregate(self._scores(values))
        b = usability_aggregate(self._scores(list(reversed(values))))
        assert a == pytest.approx(b, abs=1e-15)

    @given(st.lists(st.floats(0.1, U_CHECK_MAX), min_size=1, max_size=30))
    @settings(max_examples=150, deadline=None)
    def test_between_min_and_max(self, values):
        u = usability_aggregate(self._scores(values))
        assert min(values) / 100 - 1e-9 <= u <= max(values) / 100 + 1e-9


class TestDisplay:
    def test_maximum_displays_as_hundred(self):
        assert to_percent_display(UsabilityScore("r", U_CHECK_MAX)) == \
            pytest.approx(100.0)

    def test_display_never_feeds_aggregation(self):
        # The aggregate of the maximum raw score is max/100, not 1.0.
        u = usability_aggregate([UsabilityScore("r", U_CHECK_MAX)])
        assert u == pytest.approx(U_CHECK_MAX / 100)


class TestQuestionnaire:
    def test_seventeen_items_with_subscales(self):
        items = questionnaire()
        assert len(items) == ITEM_COUNT
        assert [q["index"] for q in items] == list(range(1, 18))
        subscales = {q["subscale"] for q in items}
        assert "utility" in subscales
        assert "aesthetics" in subscales

    def test_wordings_are_unique_and_nonempty(self):
        items = questionnaire()
        texts = [q["text"] for q in items]
        assert all(texts)
        assert len(set(texts)) == ITEM_COUNT
