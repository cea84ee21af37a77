"""Hybrid assessment of web user interface and experience quality.

Combines three measurement channels for one site: automated audit scores
for performance and accessibility, an extended 17-item usability survey
with review sentiment, and expert pairwise weighting of the three
criteria. On top of the weighted quality score it offers respondent
segmentation (seeded k-means with elbow selection) and exact
Shapley-value attributions of cluster membership to feature groups.
"""

from .ahp import (
    ComparisonMatrix,
    ConsistencyReport,
    ExpertJudgment,
    WeightVector,
    aggregate_experts,
    consistency,
    derive_weights,
)
from .errors import ConfigurationError, ValidationError, WuiqError
from .ingest import (
    AuditReport,
    MetricScores,
    parse_expert_batch,
    parse_lighthouse,
    parse_survey_batch,
)
from .scoring import EvaluationIteration, ProjectHistory, compute_wuiq, grade
from .segmentation import FeatureMatrix, KMeansModel, elbow, kmeans, scree
from .explainability import (
    FeatureGrouping,
    MembershipFunction,
    ShapExplanation,
    shapley_exact,
)
from .store import ProjectConfig, ProjectStore
from .usability import (
    SurveyResponse,
    sentiment_score,
    sus_extended_score,
    usability_aggregate,
)

__version__ = "1.0.0"

__all__ = [
    "AuditReport",
    "ComparisonMatrix",
    "ConfigurationError",
    "ConsistencyReport",
    "EvaluationIteration",
    "ExpertJudgment",
    "FeatureGrouping",
    "FeatureMatrix",
    "KMeansModel",
    "MembershipFunction",
    "MetricScores",
    "ProjectConfig",
    "ProjectHistory",
    "ProjectStore",
    "ShapExplanation",
    "SurveyResponse",
    "ValidationError",
    "WeightVector",
    "WuiqError",
    "aggregate_experts",
    "compute_wuiq",
    "consistency",
    "derive_weights",
    "elbow",
    "grade",
    "kmeans",
    "parse_expert_batch",
    "parse_lighthouse",
    "parse_survey_batch",
    "scree",
    "sentiment_score",
    "shapley_exact",
    "sus_extended_score",
    "usability_aggregate",
]
