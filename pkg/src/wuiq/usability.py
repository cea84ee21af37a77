"""Extended SUS survey scoring with a sentiment term.

Each respondent answers 17 Likert items (the 10 core SUS items plus 7
extended items covering system utility and aesthetics/UI structure) and a
mandatory free-text review. The review is scored in [0, 1] by a pluggable
sentiment provider; the default is a deterministic lexicon scorer whose
two logits (positive-token count, negative-token count) go through a
softmax. Per-user scores are combined into the usability metric U by
geometric mean.

Scale note: the per-user score formula tops out at 260.1 / 3.5 = 74.3142857,
not 100. The positive-item and extended-item sums carry a factor of 5 that
the negative-item term does not, and the sentiment term enters divided by
10. This is intentional and implemented exactly as specified; use
:func:`to_percent_display` for a 0-100 presentation. The displayed value
never feeds the aggregate quality score.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import ConfigurationError, ValidationError

ITEM_COUNT = 17
# 1-based Likert item indices by role in the scoring formula.
POSITIVE_ITEMS = (1, 3, 5, 7, 9)
NEGATIVE_ITEMS = (2, 4, 6, 8, 10)
EXTENDED_ITEMS = (11, 12, 13, 14, 15, 16, 17)

# Maximum attainable per-user score: (5 * (25 + 35 - 12) + (25 - 5) + 0.1) / 3.5
U_CHECK_MAX = 260.1 / 3.5

_TOKEN_SPLIT = re.compile(r"[^a-z0-9]+")


@dataclass(frozen=True)
class SurveyResponse:
    """One respondent's 17 Likert answers, review text, and usage duration."""

    respondent_id: str
    items: tuple[int, ...]
    review_text: str
    duration_months: float = 0.0
    submitted_at: str = ""

    def __post_init__(self):
        if not self.respondent_id:
            raise ValidationError("respondent_id must be non-empty", field="respondent_id")
        items = tuple(self.items)
        if len(items) != ITEM_COUNT:
            raise ValidationError(
                f"expected {ITEM_COUNT} items, got {len(items)}", field="items"
            )
        for idx, value in enumerate(items, start=1):
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool) \
                    or not 1 <= int(value) <= 5:
                raise ValidationError(
                    f"item uq_{idx} must be an integer in 1..5, got {value!r}",
                    field=f"uq_{idx}",
                )
        object.__setattr__(self, "items", tuple(int(v) for v in items))
        if not self.review_text or not self.review_text.strip():
            raise ValidationError("review text is mandatory", field="review_text")
        if self.duration_months < 0:
            raise ValidationError(
                "duration_months must be non-negative", field="duration_months"
            )

    def item(self, index: int) -> int:
        """1-based item access, matching the questionnaire numbering."""
        return self.items[index - 1]


@dataclass(frozen=True)
class SentimentScore:
    """Positive-class sentiment probability in [0, 1]."""

    value: float

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValidationError(f"sentiment must lie in [0, 1], got {self.value}")


@dataclass(frozen=True)
class UsabilityScore:
    """Per-user extended SUS score on the [0, 74.3143] scale."""

    respondent_id: str
    u_check: float

    def __post_init__(self):
        if not 0.0 <= self.u_check <= U_CHECK_MAX + 1e-9:
            raise ValidationError(
                f"u_check {self.u_check} outside [0, {U_CHECK_MAX}]", field="u_check"
            )


def preprocess_text(text: str) -> list[str]:
    """Lowercase, strip punctuation to spaces, split on whitespace, drop empties."""
    return [t for t in _TOKEN_SPLIT.split(text.lower()) if t]


def softmax(z) -> np.ndarray:
    """Numerically stable softmax; outputs sum to 1 and are shift-invariant."""
    z = np.asarray(z, dtype=float)
    if z.size == 0:
        raise ValidationError("softmax input must be non-empty")
    shifted = z - z.max()
    e = np.exp(shifted)
    return e / e.sum()


def _load_word_list(name: str) -> frozenset[str]:
    text = resources.files("wuiq.data").joinpath(name).read_text(encoding="utf-8")
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line.lower())
    return frozenset(words)


class LexiconScorer:
    """Deterministic sentiment provider backed by positive/negative word lists.

    Logits are (count of positive tokens, count of negative tokens) over the
    preprocessed token stream; the score is the positive-class softmax
    component. Empty text yields 0.5. Stateless after construction.
    """

    name = "lexicon"

    def __init__(self, positive=None, negative=None):
        self.positive = frozenset(positive) if positive is not None \
            else _load_word_list("positive_words.txt")
        self.negative = frozenset(negative) if negative is not None \
            else _load_word_list("negative_words.txt")

    def score(self, text: str) -> SentimentScore:
        tokens = preprocess_text(text)
        pos = sum(1 for t in tokens if t in self.positive)
        neg = sum(1 for t in tokens if t in self.negative)
        probs = softmax((float(pos), float(neg)))
        return SentimentScore(float(probs[0]))


_SCORER_FACTORIES = {"lexicon": LexiconScorer}
_scorer_cache: dict[str, object] = {}


def register_scorer(name: str, factory) -> None:
    """Register a sentiment provider factory under ``name``."""
    _SCORER_FACTORIES[name] = factory
    _scorer_cache.pop(name, None)


def get_scorer(name: str):
    """Look up a registered sentiment provider; unknown names are an error."""
    if name not in _SCORER_FACTORIES:
        raise ConfigurationError(
            f"unknown sentiment scorer {name!r}; registered: "
            + ", ".join(sorted(_SCORER_FACTORIES))
        )
    if name not in _scorer_cache:
        _scorer_cache[name] = _SCORER_FACTORIES[name]()
    return _scorer_cache[name]


def sentiment_score(text: str, scorer="lexicon") -> SentimentScore:
    """Score review text in [0, 1] with a provider given by name or instance."""
    if isinstance(scorer, str):
        scorer = get_scorer(scorer)
    return scorer.score(text)


def sus_extended_score(response: SurveyResponse, sentiment: SentimentScore) -> UsabilityScore:
    """Per-user extended SUS score.

    u = (5 * (sum of positive items + sum of extended items - 12)
         + (25 - sum of negative items) + sentiment / 10) / 3.5
    """
    pos = sum(response.item(i) for i in POSITIVE_ITEMS)
    neg = sum(response.item(i) for i in NEGATIVE_ITEMS)
    ext = sum(response.item(i) for i in EXTENDED_ITEMS)
    u = (5.0 * (pos + ext - 12) + (25.0 - neg) + sentiment.value / 10.0) / 3.5
    return UsabilityScore(response.respondent_id, u)


def usability_aggregate(scores) -> float:
    """Usability metric U in [0, 1]: geometric mean of per-user scores / 100.

    Accepts :class:`UsabilityScore` values or bare non-negative numbers.
    Computed via the mean of logarithms; any zero score forces U = 0.
    """
    if not scores:
        raise ValidationError("usability_aggregate requires at least one score")
    values = np.array(
        [s.u_check if isinstance(s, UsabilityScore) else float(s) for s in scores]
    )
    if np.any(values < 0.0) or not np.all(np.isfinite(values)):
        raise ValidationError("per-user scores must be finite and non-negative")
    if np.any(values == 0.0):
        return 0.0
    return float(np.exp(np.mean(np.log(values))) / 100.0)


def to_percent_display(score: UsabilityScore) -> float:
    """Rescale a per-user score to 0-100 for display only; never feeds WUIQ."""
    return score.u_check / U_CHECK_MAX * 100.0


def questionnaire() -> list[dict]:
    """The shipped 17-item questionnaire: index, subscale, and wording.

    Items 1-10 are the core SUS items; 11-13 cover system utility and
    14-17 cover aesthetics and UI structure. The extended wordings are
    this package's own phrasing of those subcomponents.
    """
    text = resources.files("wuiq.data").joinpath("questionnaire.json").read_text("utf-8")
    return json.loads(text)
