"""Ingestion of automated audit results and batch survey/expert files.

Performance and accessibility scores arrive as a standard Lighthouse
result document (JSON, v6+ layout); surveys arrive as JSON or as
delimited text with a header row; expert judgments arrive as JSON holding
only the upper-triangle comparisons, from which the full reciprocal
matrix is reconstructed.

All parsers are total: malformed input of any kind surfaces as a
structured :class:`ParseError` / :class:`BatchValidationError`, never as
a stray exception.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .ahp import DEFAULT_CRITERIA, ComparisonMatrix, ExpertJudgment, check_judgment_scale
from .errors import ValidationError, WuiqError
from .usability import ITEM_COUNT, SurveyResponse


class ParseError(WuiqError):
    """A document could not be read at all, or a required path is missing."""

    code = "invalid_document"

    def __init__(self, message, path=None):
        super().__init__(message)
        self.path = path


class BatchValidationError(ValidationError):
    """One or more records in a batch violate the record contract.

    ``details`` lists one human-readable message per offender, each naming
    the record and field.
    """

    code = "invalid_record"


class InvalidTimingError(ValidationError):
    """Content-downloaded time precedes link-open time."""

    code = "invalid_timing"


@dataclass(frozen=True)
class MetricScores:
    """The (performance, accessibility, usability) triple, each in [0, 1]."""

    performance: float
    accessibility: float
    usability: float

    def __post_init__(self):
        for name in ("performance", "accessibility", "usability"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name} score must lie in [0, 1], got {v}", field=name)


@dataclass(frozen=True)
class TimingRecord:
    """User-perceived load timing: link opened at beta, content done at alpha."""

    link_opened_at: float
    content_downloaded_at: float


@dataclass(frozen=True)
class AuditReport:
    """Performance/accessibility category scores extracted from an audit."""

    source_url: str
    fetched_at: str
    performance_score: float
    accessibility_score: float

    def __post_init__(self):
        for name in ("performance_score", "accessibility_score"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1], got {v}", field=name)


def page_load_time(timing: TimingRecord) -> float:
    """Load time in seconds: content-downloaded minus link-opened. Diagnostic only."""
    rho = timing.content_downloaded_at - timing.link_opened_at
    if rho < 0:
        raise InvalidTimingError(
            "content_downloaded_at precedes link_opened_at "
            f"({timing.content_downloaded_at} < {timing.link_opened_at})"
        )
    return rho


def _decode(document) -> str:
    if isinstance(document, bytes):
        try:
            return document.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"document is not valid UTF-8: {exc}") from None
    return document


def _load_json(document):
    text = _decode(document)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"document is not valid JSON: {exc}") from None


def parse_lighthouse(document) -> AuditReport:
    """Extract category scores from a Lighthouse result document.

    Only ``categories.performance.score``, ``categories.accessibility.score``,
    the final/requested URL, and the fetch time are read; everything else in
    the report is ignored. A missing category or score is an error naming
    the missing path.
    """
    data = _load_json(document)
    if not isinstance(data, dict):
        raise ParseError("Lighthouse document must be a JSON object")
    categories = data.get("categories")
    if not isinstance(categories, dict):
        raise ParseError("missing Lighthouse path: categories", path="categories")
    scores = {}
    for name in ("performance", "accessibility"):
        category = categories.get(name)
        if not isinstance(category, dict):
            raise ParseError(f"missing Lighthouse path: categories.{name}",
                             path=f"categories.{name}")
        score = category.get("score")
        if not isinstance(score, (int, float)) or isinstance(score, bool):
            raise ParseError(f"missing Lighthouse path: categories.{name}.score",
                             path=f"categories.{name}.score")
        if not 0.0 <= float(score) <= 1.0:
            raise ParseError(
                f"categories.{name}.score must lie in [0, 1], got {score}",
                path=f"categories.{name}.score",
            )
        scores[name] = float(score)
    url = data.get("finalUrl") or data.get("requestedUrl") or ""
    fetched_at = data.get("fetchTime") or ""
    return AuditReport(
        source_url=str(url),
        fetched_at=str(fetched_at),
        performance_score=scores["performance"],
        accessibility_score=scores["accessibility"],
    )


def _survey_from_record(record: dict, where: str, errors: list[str]) -> SurveyResponse | None:
    try:
        items = record.get("items")
        if not isinstance(items, (list, tuple)):
            raise ValidationError("items must be a list of 17 integers", field="items")
        return SurveyResponse(
            respondent_id=str(record.get("respondent_id", "")),
            items=tuple(items),
            review_text=str(record.get("review_text", "")),
            duration_months=float(record.get("duration_months", 0.0)),
            submitted_at=str(record.get("submitted_at", "")),
        )
    except (ValidationError, TypeError, ValueError) as exc:
        field = getattr(exc, "field", None)
        suffix = f" (field {field})" if field else ""
        errors.append(f"{where}: {exc}{suffix}")
        return None


def parse_survey_batch(document) -> list[SurveyResponse]:
    """Parse a survey batch from JSON or delimited text.

    JSON form: ``{"surveys": [{respondent_id, items, review_text,
    duration_months, submitted_at}, ...]}``. Delimited form: header row
    ``respondent_id, uq_1..uq_17, review_text, duration_months`` with an
    optional ``submitted_at`` column. Every record is validated; all
    offenders are reported together, each tagged with its record number.
    """
    text = _decode(document)
    stripped = text.lstrip()
    if stripped.startswith("{") or stripped.startswith("["):
        return _parse_survey_json(text)
    return _parse_survey_csv(text)


def _check_duplicates(responses: list[SurveyResponse], errors: list[str]) -> None:
    seen: dict[str, int] = {}
    for idx, r in enumerate(responses, start=1):
        if r.respondent_id in seen:
            errors.append(
                f"record {idx}: duplicate respondent_id {r.respondent_id!r} "
                f"(first seen at record {seen[r.respondent_id]})"
            )
        else:
            seen[r.respondent_id] = idx


def _parse_survey_json(text: str) -> list[SurveyResponse]:
    data = _load_json(text)
    if isinstance(data, dict):
        records = data.get("surveys")
    else:
        records = data
    if not isinstance(records, list):
        raise ParseError("survey batch must hold a 'surveys' list", path="surveys")
    errors: list[str] = []
    out: list[SurveyResponse] = []
    for idx, record in enumerate(records, start=1):
        if not isinstance(record, dict):
            errors.append(f"record {idx}: not an object")
            continue
        parsed = _survey_from_record(record, f"record {idx}", errors)
        if parsed is not None:
            out.append(parsed)
    if not errors:
        _check_duplicates(out, errors)
    if errors:
        raise BatchValidationError(
            f"survey batch has {len(errors)} invalid record(s)", details=errors
        )
    return out


_CSV_ITEM_COLUMNS = tuple(f"uq_{i}" for i in range(1, ITEM_COUNT + 1))
_CSV_REQUIRED = ("respondent_id",) + _CSV_ITEM_COLUMNS + ("review_text", "duration_months")


def _parse_survey_csv(text: str) -> list[SurveyResponse]:
    try:
        reader = csv.DictReader(io.StringIO(text))
        header = reader.fieldnames
    except csv.Error as exc:
        raise ParseError(f"cannot read delimited survey batch: {exc}") from None
    if header is None:
        raise ParseError("survey batch is empty (no header row)")
    missing = [c for c in _CSV_REQUIRED if c not in header]
    if missing:
        raise ParseError(f"survey header missing column(s): {', '.join(missing)}")
    errors: list[str] = []
    out: list[SurveyResponse] = []
    try:
        rows = list(reader)
    except csv.Error as exc:
        raise ParseError(f"cannot read delimited survey batch: {exc}") from None
    for idx, row in enumerate(rows, start=1):
        where = f"record {idx}"
        try:
            items = []
            for col in _CSV_ITEM_COLUMNS:
                raw = (row.get(col) or "").strip()
                if not raw or not raw.lstrip("-").isdigit():
                    raise ValidationError(
                        f"item {col} must be an integer in 1..5, got {raw!r}", field=col
                    )
                items.append(int(raw))
            record = {
                "respondent_id": row.get("respondent_id") or "",
                "items": items,
                "review_text": row.get("review_text") or "",
                "duration_months": float((row.get("duration_months") or "0").strip() or 0),
                "submitted_at": row.get("submitted_at") or "",
            }
        except (ValidationError, ValueError) as exc:
            field = getattr(exc, "field", None)
            suffix = f" (field {field})" if field else ""
            errors.append(f"{where}: {exc}{suffix}")
            continue
        parsed = _survey_from_record(record, where, errors)
        if parsed is not None:
            out.append(parsed)
    if not errors:
        _check_duplicates(out, errors)
    if errors:
        raise BatchValidationError(
            f"survey batch has {len(errors)} invalid record(s)", details=errors
        )
    return out


def serialize_survey_batch(responses: list[SurveyResponse]) -> bytes:
    """Canonical JSON form of a survey batch; parses back to equal values."""
    records = [
        {
            "respondent_id": r.respondent_id,
            "items": list(r.items),
            "review_text": r.review_text,
            "duration_months": r.duration_months,
            "submitted_at": r.submitted_at,
        }
        for r in responses
    ]
    return json.dumps({"surveys": records}, sort_keys=True, indent=2).encode("utf-8")


def serialize_survey_batch_csv(responses: list[SurveyResponse]) -> bytes:
    """Delimited form of a survey batch with the documented header row."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_CSV_REQUIRED + ("submitted_at",))
    for r in responses:
        writer.writerow(
            [r.respondent_id, *r.items, r.review_text, repr(r.duration_months),
             r.submitted_at]
        )
    return buf.getvalue().encode("utf-8")


def _matrix_from_judgments(
    judgments, labels: tuple[str, ...], where: str
) -> ComparisonMatrix:
    n = len(labels)
    index = {label: i for i, label in enumerate(labels)}
    m = np.ones((n, n), dtype=float)
    seen: dict[tuple[int, int], float] = {}
    if not isinstance(judgments, list):
        raise ValidationError(f"{where}: judgments must be a list", field="judgments")
    for pos, j in enumerate(judgments, start=1):
        if not isinstance(j, dict):
            raise ValidationError(f"{where}: judgment {pos} is not an object")
        first, second = j.get("first"), j.get("second")
        if first not in index or second not in index:
            raise ValidationError(
                f"{where}: judgment {pos} names unknown criteria "
                f"({first!r}, {second!r}); expected {', '.join(labels)}"
            )
        if first == second:
            raise ValidationError(f"{where}: judgment {pos} compares {first!r} to itself")
        value = j.get("value")
        if not isinstance(value, int) or isinstance(value, bool) or not 1 <= value <= 5:
            raise ValidationError(
                f"{where}: judgment {pos} value must be an integer in 1..5, got {value!r}"
            )
        favors = j.get("favors", "equal")
        if favors not in ("first", "second", "equal"):
            raise ValidationError(
                f"{where}: judgment {pos} favors must be 'first', 'second', or 'equal'"
            )
        if (value == 1) != (favors == "equal"):
            raise ValidationError(
                f"{where}: judgment {pos} inconsistent: value 1 must pair with "
                "favors 'equal' and values > 1 with a direction"
            )
        a, b = index[first], index[second]
        entry = 1.0 if favors == "equal" else (float(value) if favors == "first" else 1.0 / value)
        key = (min(a, b), max(a, b))
        canonical = entry if a < b else 1.0 / entry
        if key in seen:
            if abs(seen[key] - canonical) > 1e-12:
                raise ValidationError(
                    f"{where}: contradictory duplicate judgment for "
                    f"({labels[key[0]]}, {labels[key[1]]})"
                )
            continue
        seen[key] = canonical
        m[key[0], key[1]] = canonical
        m[key[1], key[0]] = 1.0 / canonical
    expected = n * (n - 1) // 2
    if len(seen) != expected:
        missing = [
            f"({labels[i]}, {labels[j]})"
            for i in range(n) for j in range(i + 1, n)
            if (i, j) not in seen
        ]
        raise ValidationError(f"{where}: missing pair(s): {', '.join(missing)}")
    matrix = ComparisonMatrix(m, labels)
    check_judgment_scale(matrix)
    return matrix


def parse_expert_batch(document, criteria: tuple[str, ...] = DEFAULT_CRITERIA) -> list[ExpertJudgment]:
    """Parse expert pairwise judgments and rebuild full reciprocal matrices.

    JSON form: ``{"experts": [{expert_id, role, submitted_at, judgments:
    [{first, second, value, favors}, ...]}, ...]}`` where each judgment
    gives one upper-triangle comparison: ``value`` in 1..5 and ``favors``
    naming the more important side ('equal' exactly when value is 1).
    Diagonal and reciprocals are filled in automatically.
    """
    data = _load_json(document)
    if isinstance(data, dict):
        records = data.get("experts")
    else:
        records = data
    if not isinstance(records, list):
        raise ParseError("expert batch must hold an 'experts' list", path="experts")
    labels = tuple(criteria)
    errors: list[str] = []
    out: list[ExpertJudgment] = []
    for idx, record in enumerate(records, start=1):
        where = f"record {idx}"
        if not isinstance(record, dict):
            errors.append(f"{where}: not an object")
            continue
        try:
            matrix = _matrix_from_judgments(record.get("judgments"), labels, where)
            out.append(
                ExpertJudgment(
                    expert_id=str(record.get("expert_id", "")),
                    role=str(record.get("role", "")),
                    matrix=matrix,
                    submitted_at=str(record.get("submitted_at", "")),
                )
            )
        except ValidationError as exc:
            errors.append(str(exc))
    if errors:
        raise BatchValidationError(
            f"expert batch has {len(errors)} invalid record(s)", details=errors
        )
    return out


def _judgments_for_matrix(matrix: ComparisonMatrix) -> list[dict]:
    out = []
    labels = matrix.criterion_labels
    for i in range(matrix.n):
        for j in range(i + 1, matrix.n):
            entry = matrix.entries[i, j]
            if entry >= 1.0:
                value, favors = int(round(entry)), "first"
            else:
                value, favors = int(round(1.0 / entry)), "second"
            if value == 1:
                favors = "equal"
            out.append({"first": labels[i], "second": labels[j],
                        "value": value, "favors": favors})
    return out


def serialize_expert_batch(judgments: list[ExpertJudgment]) -> bytes:
    """Canonical JSON form of an expert batch; parses back to equal matrices."""
    records = [
        {
            "expert_id": j.expert_id,
            "role": j.role,
            "submitted_at": j.submitted_at,
            "judgments": _judgments_for_matrix(j.matrix),
        }
        for j in judgments
    ]
    return json.dumps({"experts": records}, sort_keys=True, indent=2).encode("utf-8")
