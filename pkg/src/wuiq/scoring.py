"""WUIQ aggregation: the weighted quality score and its iteration history.

The overall score is the convex combination of the three metric scores
with the AHP-derived weights. Weights are frozen at the first evaluation
and reused for every later iteration so scores stay comparable over time.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .ahp import WeightVector
from .errors import ValidationError, WuiqError
from .ingest import MetricScores

#: Default grade band lower edges (closed on the left) above "requires improvement".
DEFAULT_GRADE_EDGES = (0.60, 0.75, 0.90)
GRADE_LABELS = ("requires improvement", "fair", "good", "excellent")


class MissingBaselineError(WuiqError):
    """Evaluation attempted before baseline weights were computed."""

    code = "missing_weights"

    def __init__(self, message="no baseline weights; run weight aggregation first"):
        super().__init__(message)


def compute_wuiq(scores: MetricScores, weights: WeightVector) -> float:
    """Weighted quality score P*w_P + A*w_A + U*w_U.

    Weight order follows the weight vector's criterion labels, which must
    be the (performance, accessibility, usability) triple.
    """
    by_label = weights.as_dict()
    missing = [k for k in ("performance", "accessibility", "usability") if k not in by_label]
    if missing:
        raise ValidationError(f"weights lack criteria: {', '.join(missing)}")
    return (
        scores.performance * by_label["performance"]
        + scores.accessibility * by_label["accessibility"]
        + scores.usability * by_label["usability"]
    )


def contributions(scores: MetricScores, weights: WeightVector) -> dict[str, float]:
    """Per-criterion share of the score (score times weight), for reporting."""
    by_label = weights.as_dict()
    return {
        "performance": scores.performance * by_label["performance"],
        "accessibility": scores.accessibility * by_label["accessibility"],
        "usability": scores.usability * by_label["usability"],
    }


@dataclass(frozen=True)
class EvaluationIteration:
    """One time-indexed evaluation with the frozen weights it used."""

    t: int
    scores: MetricScores
    weights: WeightVector
    wuiq: float
    evaluated_at: str = ""

    def __post_init__(self):
        if self.t < 1:
            raise ValidationError("iteration index t must be >= 1", field="t")
        expected = compute_wuiq(self.scores, self.weights)
        if abs(self.wuiq - expected) > 1e-12:
            raise ValidationError(
                f"stored wuiq {self.wuiq} disagrees with recomputed {expected}"
            )


@dataclass(frozen=True)
class ProjectHistory:
    """Ordered evaluation iterations sharing one baseline weight vector."""

    project_id: str
    baseline_weights: WeightVector | None = None
    iterations: tuple[EvaluationIteration, ...] = ()

    def __post_init__(self):
        for pos, it in enumerate(self.iterations, start=1):
            if it.t != pos:
                raise ValidationError(
                    f"iteration indices must be consecutive from 1; found t={it.t} at position {pos}"
                )
        object.__setattr__(self, "iterations", tuple(self.iterations))


def append_iteration(
    history: ProjectHistory, scores: MetricScores, evaluated_at: str = ""
) -> ProjectHistory:
    """Append an evaluation with the next index, reusing the baseline weights."""
    if history.baseline_weights is None:
        raise MissingBaselineError()
    weights = history.baseline_weights
    iteration = EvaluationIteration(
        t=len(history.iterations) + 1,
        scores=scores,
        weights=weights,
        wuiq=compute_wuiq(scores, weights),
        evaluated_at=evaluated_at,
    )
    return replace(history, iterations=history.iterations + (iteration,))


def grade(value: float, edges: tuple[float, float, float] = DEFAULT_GRADE_EDGES) -> str:
    """Qualitative band for a score in [0, 1]; boundaries closed on the left.

    Default bands: [0, 0.60) requires improvement, [0.60, 0.75) fair,
    [0.75, 0.90) good, [0.90, 1.0] excellent. The edges above the lowest
    band are conventional and configurable.
    """
    if not 0.0 <= value <= 1.0:
        raise ValidationError(f"score must lie in [0, 1], got {value}")
    if list(edges) != sorted(edges) or len(edges) != 3:
        raise ValidationError(f"grade edges must be three ascending values, got {edges}")
    for edge, label in zip(reversed(edges), reversed(GRADE_LABELS[1:])):
        if value >= edge:
            return label
    return GRADE_LABELS[0]


def percent_display(value: float) -> str:
    """Whole-percent rendering used in CLI output and reports (0.580708 -> '58%')."""
    return f"{round(value * 100):d}%"
