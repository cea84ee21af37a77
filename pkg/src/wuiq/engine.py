"""Pipeline steps over a project store.

Each step reads the append-only logs and/or earlier artifacts, computes,
persists a derived artifact with the log offsets it consumed, and returns
the payload it wrote. All timestamps are caller-supplied strings so a
pipeline run is a pure function of (logs, config, seed, now).
"""

from __future__ import annotations

import numpy as np

from . import ahp
from .ahp import ExpertJudgment, WeightVector, aggregate_experts
from .errors import ValidationError
from .explainability import (
    BackgroundSet,
    FeatureGrouping,
    explain_cluster,
    export_attribution_data,
    global_importance,
)
from .ingest import (
    AuditReport,
    MetricScores,
    _judgments_for_matrix,
    _matrix_from_judgments,
    parse_expert_batch,
    parse_lighthouse,
    parse_survey_batch,
)
from .scoring import (
    MissingBaselineError,
    ProjectHistory,
    append_iteration,
    grade,
    percent_display,
)
from .segmentation import (
    FeatureMatrix,
    KMeansModel,
    Standardization,
    cluster_summary,
    elbow,
    kmeans,
    scree,
    standardize,
)
from .store import FrozenWeightsError, ProjectStore
from .usability import (
    EXTENDED_ITEMS,
    ITEM_COUNT,
    NEGATIVE_ITEMS,
    POSITIVE_ITEMS,
    SurveyResponse,
    sentiment_score,
    sus_extended_score,
    usability_aggregate,
)

#: Instance-feature layout used for segmentation ("full" mode) and for
#: attributions: the 17 Likert answers, the review sentiment, and tenure.
RAW_FEATURES = tuple(f"uq_{i}" for i in range(1, ITEM_COUNT + 1)) + (
    "sentiment",
    "duration_months",
)

#: Default two-feature space for segmentation: how long someone has used
#: the site, and how they scored it.
DEFAULT_CLUSTER_FEATURES = ("duration_months", "u_check")

#: Default attribution groups over the raw instance features.
DEFAULT_GROUPS = (
    ("sus_positive", tuple(f"uq_{i}" for i in POSITIVE_ITEMS)),
    ("sus_negative", tuple(f"uq_{i}" for i in NEGATIVE_ITEMS)),
    ("s_utility", ("uq_11", "uq_12", "uq_13")),
    ("s_aesthetics", ("uq_14", "uq_15", "uq_16", "uq_17")),
    ("sentiment", ("sentiment",)),
    ("duration", ("duration_months",)),
)


# -- log record codecs ------------------------------------------------------

def survey_to_record(r: SurveyResponse) -> dict:
    return {
        "respondent_id": r.respondent_id,
        "items": list(r.items),
        "review_text": r.review_text,
        "duration_months": r.duration_months,
        "submitted_at": r.submitted_at,
    }


def survey_from_record(d: dict) -> SurveyResponse:
    return SurveyResponse(
        respondent_id=d["respondent_id"],
        items=tuple(d["items"]),
        review_text=d["review_text"],
        duration_months=float(d.get("duration_months", 0.0)),
        submitted_at=d.get("submitted_at", ""),
    )


def judgment_to_record(j: ExpertJudgment) -> dict:
    return {
        "expert_id": j.expert_id,
        "role": j.role,
        "submitted_at": j.submitted_at,
        "judgments": _judgments_for_matrix(j.matrix),
    }


def judgment_from_record(d: dict, criteria) -> ExpertJudgment:
    matrix = _matrix_from_judgments(d["judgments"], tuple(criteria), d.get("expert_id", "?"))
    return ExpertJudgment(
        expert_id=d["expert_id"],
        role=d.get("role", ""),
        matrix=matrix,
        submitted_at=d.get("submitted_at", ""),
    )


def audit_to_record(a: AuditReport) -> dict:
    return {
        "source_url": a.source_url,
        "fetched_at": a.fetched_at,
        "performance_score": a.performance_score,
        "accessibility_score": a.accessibility_score,
    }


def audit_from_record(d: dict) -> AuditReport:
    return AuditReport(
        source_url=d.get("source_url", ""),
        fetched_at=d.get("fetched_at", ""),
        performance_score=float(d["performance_score"]),
        accessibility_score=float(d["accessibility_score"]),
    )


def load_surveys(store: ProjectStore) -> list[SurveyResponse]:
    return [survey_from_record(r) for r in store.read_log("surveys").records]


def load_experts(store: ProjectStore) -> list[ExpertJudgment]:
    criteria = store.manifest.criteria
    return [judgment_from_record(r, criteria) for r in store.read_log("experts").records]


def load_audits(store: ProjectStore) -> list[AuditReport]:
    return [audit_from_record(r) for r in store.read_log("audits").records]


def latest_per_expert(judgments: list[ExpertJudgment]) -> list[ExpertJudgment]:
    """Collapse resubmissions: the last record per expert_id wins, in
    order of each expert's first appearance."""
    latest: dict[str, ExpertJudgment] = {}
    for j in judgments:
        latest[j.expert_id] = j
    return list(latest.values())


# -- ingestion steps --------------------------------------------------------

def ingest_surveys(store: ProjectStore, document, now: str = "") -> dict:
    """Validate and append a survey batch; whole-batch rejection on any offender."""
    batch = parse_survey_batch(document)
    existing = {r["respondent_id"] for r in store.read_log("surveys").records}
    clashes = [r.respondent_id for r in batch if r.respondent_id in existing]
    if clashes:
        raise ValidationError(
            "respondent_id(s) already ingested: " + ", ".join(sorted(set(clashes))),
            field="respondent_id",
        )
    offset = store.append_records("surveys", [survey_to_record(r) for r in batch])
    store.record_event("surveys_ingested", now, count=len(batch))
    return {"ingested": len(batch), "total": offset}


def ingest_experts(store: ProjectStore, document, now: str = "") -> dict:
    """Validate and append an expert batch.

    Resubmission by the same expert is allowed; the latest record wins at
    aggregation time. Each record's consistency ratio is reported back so
    an inconsistent expert learns immediately, but acceptance is decided
    at aggregation.
    """
    batch = parse_expert_batch(document, store.manifest.criteria)
    threshold = store.manifest.config.cr_threshold
    previews = []
    for j in batch:
        report = ahp.consistency(j.matrix, threshold)
        previews.append({
            "expert_id": j.expert_id,
            "cr": report.cr,
            "accepted": report.accepted,
        })
    offset = store.append_records("experts", [judgment_to_record(j) for j in batch])
    store.record_event("experts_ingested", now, count=len(batch))
    return {"ingested": len(batch), "total": offset, "consistency": previews}


def ingest_audit(store: ProjectStore, document, now: str = "") -> dict:
    """Parse one automated audit result and append its category scores."""
    report = parse_lighthouse(document)
    offset = store.append_records("audits", [audit_to_record(report)])
    store.record_event("audit_ingested", now, source_url=report.source_url)
    return {
        "ingested": 1,
        "total": offset,
        "performance_score": report.performance_score,
        "accessibility_score": report.accessibility_score,
    }


# -- weights ----------------------------------------------------------------

def compute_weights(
    store: ProjectStore,
    threshold: float | None = None,
    override: bool = False,
    now: str = "",
) -> dict:
    """Aggregate accepted expert judgments into the frozen baseline weights.

    Once written, the baseline is immutable for the project's lifetime;
    recomputation requires ``override`` and leaves an audit-trail entry.
    """
    existing = store.read_artifact("weights")
    if existing is not None and not override:
        raise FrozenWeightsError(
            "baseline weights are frozen for this project; "
            "pass the explicit override to recompute"
        )
    judgments = latest_per_expert(load_experts(store))
    if not judgments:
        raise ValidationError("no expert judgments ingested yet")
    if threshold is None:
        threshold = store.manifest.config.cr_threshold
    weights, reports = aggregate_experts(judgments, threshold)
    payload = {
        "criteria": list(weights.criterion_labels),
        "weights": weights.as_dict(),
        "cr_threshold": threshold,
        "experts": [
            {
                "expert_id": j.expert_id,
                "role": j.role,
                "lambda_max": r.lambda_max,
                "ci": r.ci,
                "ri": r.ri,
                "cr": r.cr,
                "accepted": r.accepted,
            }
            for j, r in zip(judgments, reports)
        ],
        "accepted_count": sum(1 for r in reports if r.accepted),
        "computed_at": now,
        "input_offsets": store.log_offsets(),
    }
    store.write_artifact("weights", payload)
    store.record_event(
        "weights_overridden" if existing is not None else "weights_computed",
        now,
        accepted=payload["accepted_count"],
    )
    return payload


def baseline_weights(store: ProjectStore) -> WeightVector:
    payload = store.read_artifact("weights")
    if payload is None:
        raise MissingBaselineError()
    labels = tuple(payload["criteria"])
    return WeightVector(
        np.array([payload["weights"][c] for c in labels]), labels
    )


# -- respondent feature extraction ------------------------------------------

def respondent_features(store: ProjectStore, surveys=None) -> list[dict]:
    """Per-respondent derived values: sentiment, per-user score, raw features."""
    if surveys is None:
        surveys = load_surveys(store)
    scorer = store.manifest.config.scorer
    out = []
    for r in surveys:
        s = sentiment_score(r.review_text, scorer)
        u = sus_extended_score(r, s)
        out.append({
            "respondent_id": r.respondent_id,
            "sentiment": s.value,
            "u_check": u.u_check,
            "duration_months": r.duration_months,
            "items": r.items,
            "score": u,
        })
    return out


def _u_check_columns(rows: np.ndarray) -> np.ndarray:
    """Vectorized per-user score over rows laid out as RAW_FEATURES."""
    pos = rows[:, [i - 1 for i in POSITIVE_ITEMS]].sum(axis=1)
    neg = rows[:, [i - 1 for i in NEGATIVE_ITEMS]].sum(axis=1)
    ext = rows[:, [i - 1 for i in EXTENDED_ITEMS]].sum(axis=1)
    s = rows[:, ITEM_COUNT]
    return (5.0 * (pos + ext - 12.0) + (25.0 - neg) + s / 10.0) / 3.5


def raw_feature_rows(features: list[dict]) -> np.ndarray:
    """Instance rows laid out as RAW_FEATURES, one per respondent."""
    return np.array([
        list(f["items"]) + [f["sentiment"], f["duration_months"]] for f in features
    ], dtype=float)


def cluster_feature_matrix(store: ProjectStore, features: list[dict]) -> FeatureMatrix:
    """Feature matrix for segmentation per the project's configuration."""
    mode = store.manifest.config.cluster_features
    if mode == "default":
        values = np.array(
            [[f["duration_months"], f["u_check"]] for f in features], dtype=float
        )
        return FeatureMatrix(values, DEFAULT_CLUSTER_FEATURES)
    return FeatureMatrix(raw_feature_rows(features), RAW_FEATURES)


# -- evaluation -------------------------------------------------------------

def history_from_payload(store: ProjectStore, payload: dict | None) -> ProjectHistory:
    weights = baseline_weights(store)
    history = ProjectHistory(
        project_id=store.manifest.project_id, baseline_weights=weights
    )
    if payload is None:
        return history
    for it in payload["iterations"]:
        scores = MetricScores(
            performance=it["scores"]["performance"],
            accessibility=it["scores"]["accessibility"],
            usability=it["scores"]["usability"],
        )
        history = append_iteration(history, scores, it.get("evaluated_at", ""))
    return history


def run_evaluation(store: ProjectStore, now: str = "") -> dict:
    """Score the current state: U from all surveys, P and A from the latest audit."""
    surveys = load_surveys(store)
    if not surveys:
        raise ValidationError("no surveys ingested yet; the usability metric needs at least one")
    audits = load_audits(store)
    if not audits:
        raise ValidationError("no audit results ingested yet; performance and "
                              "accessibility come from the latest audit")
    features = respondent_features(store, surveys)
    u = usability_aggregate([f["score"] for f in features])
    latest = audits[-1]
    scores = MetricScores(
        performance=latest.performance_score,
        accessibility=latest.accessibility_score,
        usability=u,
    )
    history = history_from_payload(store, store.read_artifact("iterations"))
    history = append_iteration(history, scores, now)
    edges = tuple(store.manifest.config.grade_edges)
    payload = {
        "project_id": history.project_id,
        "iterations": [
            {
                "t": it.t,
                "scores": {
                    "performance": it.scores.performance,
                    "accessibility": it.scores.accessibility,
                    "usability": it.scores.usability,
                },
                "wuiq": it.wuiq,
                "display": percent_display(it.wuiq),
                "grade": grade(it.wuiq, edges),
                "evaluated_at": it.evaluated_at,
            }
            for it in history.iterations
        ],
        "computed_at": now,
        "input_offsets": store.log_offsets(),
    }
    store.write_artifact("iterations", payload)
    store.record_event("evaluation_run", now, t=len(history.iterations))
    return payload


# -- segmentation -----------------------------------------------------------

def run_segmentation(
    store: ProjectStore,
    k: int | str = "auto",
    seed: int | None = None,
    now: str = "",
) -> dict:
    """Cluster respondents; k comes from the scree elbow unless given."""
    surveys = load_surveys(store)
    if len(surveys) < 3:
        raise ValidationError(
            f"segmentation needs at least 3 surveys, have {len(surveys)}"
        )
    features = respondent_features(store, surveys)
    raw = cluster_feature_matrix(store, features)
    z = standardize(raw)
    if seed is None:
        seed = store.manifest.config.seed
    restarts = store.manifest.config.restarts
    k_max = min(10, raw.n)
    points = scree(z, 1, k_max, seed=seed, restarts=restarts)
    if k == "auto" or k is None:
        chosen = elbow(points)
        selection = "elbow"
    else:
        chosen = int(k)
        if not 1 <= chosen <= raw.n:
            raise ValidationError(f"k must lie in 1..{raw.n}, got {chosen}")
        selection = "explicit"
    best_model = None
    for r in range(restarts):
        run_seed = int(np.random.SeedSequence([seed, chosen, r]).generate_state(1)[0])
        model = kmeans(z, chosen, seed=run_seed)
        if best_model is None or model.sse < best_model.sse:
            best_model = model
    summary = cluster_summary(best_model, raw)
    std = z.standardization
    payload = {
        "k": chosen,
        "k_selection": selection,
        "seed": seed,
        "restarts": restarts,
        "feature_names": list(raw.feature_names),
        "values": raw.values.tolist(),
        "standardization": {"mean": std.mean.tolist(), "std": std.std.tolist()},
        "centroids": best_model.centroids.tolist(),
        "labels": best_model.labels.tolist(),
        "respondents": [f["respondent_id"] for f in features],
        "sse": best_model.sse,
        "iterations_run": best_model.iterations_run,
        "run_seed": best_model.seed,
        "scree": [{"k": p.k, "sse": p.sse} for p in points],
        "clusters": summary,
        "computed_at": now,
        "input_offsets": store.log_offsets(),
    }
    store.write_artifact("segments", payload)
    store.record_event("segmentation_run", now, k=chosen)
    return payload


def model_from_payload(payload: dict) -> tuple[KMeansModel, Standardization]:
    model = KMeansModel(
        k=payload["k"],
        centroids=np.array(payload["centroids"], dtype=float),
        labels=np.array(payload["labels"], dtype=int),
        sse=payload["sse"],
        iterations_run=payload["iterations_run"],
        seed=payload["run_seed"],
    )
    std = Standardization(
        mean=np.array(payload["standardization"]["mean"], dtype=float),
        std=np.array(payload["standardization"]["std"], dtype=float),
    )
    return model, std


# -- explanations -----------------------------------------------------------

def run_explanations(
    store: ProjectStore,
    cluster: int,
    mode: str = "indicator",
    now: str = "",
) -> dict:
    """Exact per-group attributions of membership in one cluster of the
    latest segmentation, one explanation per surveyed respondent."""
    segments = store.require_artifact("segments")
    model, std = model_from_payload(segments)
    if not 0 <= cluster < model.k:
        raise ValidationError(
            f"cluster must lie in 0..{model.k - 1}, got {cluster}", field="cluster"
        )
    surveys = load_surveys(store)
    features = respondent_features(store, surveys)
    rows = raw_feature_rows(features)
    data = FeatureMatrix(rows, RAW_FEATURES)
    if list(segments["feature_names"]) == list(DEFAULT_CLUSTER_FEATURES):
        duration_col = RAW_FEATURES.index("duration_months")

        def transform(r):
            return np.column_stack([r[:, duration_col], _u_check_columns(r)])
    elif list(segments["feature_names"]) == list(RAW_FEATURES):
        transform = None
    else:
        raise ValidationError(
            "segmentation feature layout not recognized; re-run segmentation"
        )
    grouping = FeatureGrouping(DEFAULT_GROUPS)
    explanations, base = explain_cluster(
        model,
        data,
        grouping,
        cluster,
        mode=mode,
        background=BackgroundSet(rows, RAW_FEATURES),
        standardization=std,
        transform=transform,
        instance_ids=[f["respondent_id"] for f in features],
    )
    payload = {
        "cluster": cluster,
        "mode": mode,
        "base_value": base,
        "groups": [name for name, _ in DEFAULT_GROUPS],
        "global_importance": [
            {"group": name, "mean_abs_phi": value}
            for name, value in global_importance(explanations)
        ],
        "attributions": export_attribution_data(explanations),
        "efficiency_residual_max": max(e.efficiency_residual for e in explanations),
        "computed_at": now,
        "input_offsets": store.log_offsets(),
        "segments_computed_at": segments.get("computed_at", ""),
    }
    store.write_artifact("explanations", payload)
    store.record_event("explanations_run", now, cluster=cluster, mode=mode)
    return payload


# -- consolidated report ----------------------------------------------------

def build_report(store: ProjectStore) -> dict:
    """Everything derived so far, for rendering or API consumption."""
    report = {
        "project_id": store.manifest.project_id,
        "criteria": list(store.manifest.criteria),
        "created_at": store.manifest.created_at,
        "config": store.manifest.config.to_dict(),
        "log_offsets": store.log_offsets(),
        "weights": store.read_artifact("weights"),
        "iterations": store.read_artifact("iterations"),
        "segments": store.read_artifact("segments"),
        "explanations": store.read_artifact("explanations"),
    }
    config = dict(report["config"])
    config.pop("auth_token", None)
    report["config"] = config
    return report
