"""Criterion weighting from expert pairwise comparisons.

Implements the classic reciprocal-matrix workflow: column normalization,
row-average weight derivation, Saaty's consistency check against the
random-index table, and geometric-mean aggregation of the weight vectors
of all experts whose judgments pass the consistency gate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError, WuiqError

DEFAULT_CRITERIA = ("performance", "accessibility", "usability")

# Saaty's average random consistency index, indexed by matrix order n.
RANDOM_INDEX = {
    1: 0.00, 2: 0.00, 3: 0.58, 4: 0.9, 5: 1.12,
    6: 1.24, 7: 1.32, 8: 1.41, 9: 1.45, 10: 1.49,
}

# Judgment values an expert may enter: 1..5 and their inverses.
JUDGMENT_SCALE = (1.0, 2.0, 3.0, 4.0, 5.0, 1 / 2, 1 / 3, 1 / 4, 1 / 5)

DEFAULT_CR_THRESHOLD = 0.10

_RECIPROCITY_TOL = 1e-12


class DegenerateWeightsError(WuiqError):
    """A weight vector contains a zero component where positivity is required."""

    code = "degenerate_weights"


class UnsupportedDimensionError(WuiqError):
    """Matrix order outside the 1..10 range covered by the random-index table."""

    code = "unsupported_dimension"


class NoAcceptedJudgmentsError(WuiqError):
    """Every expert judgment failed the consistency gate."""

    code = "no_accepted_judgments"


@dataclass(frozen=True, eq=False)
class ComparisonMatrix:
    """One expert's reciprocal pairwise judgments over ``n`` criteria.

    Entries must be positive, the diagonal exactly 1, and ``m[i, j] * m[j, i]``
    must equal 1 within 1e-12. Internal arithmetic accepts any positive
    reciprocal matrix; the discrete 1-5 judgment scale is enforced only at
    the input boundary (see :func:`check_judgment_scale` and the batch parser).
    """

    entries: np.ndarray
    criterion_labels: tuple[str, ...] = DEFAULT_CRITERIA

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError("comparison matrix must be square")
        n = m.shape[0]
        if n < 2:
            raise ValidationError("comparison matrix needs at least 2 criteria")
        if len(self.criterion_labels) != n:
            raise ValidationError(
                f"expected {n} criterion labels, got {len(self.criterion_labels)}"
            )
        if not np.all(np.isfinite(m)) or np.any(m <= 0):
            raise ValidationError("comparison matrix entries must be positive and finite")
        if np.any(np.diag(m) != 1.0):
            raise ValidationError("comparison matrix diagonal must be exactly 1")
        if np.max(np.abs(m * m.T - 1.0)) > _RECIPROCITY_TOL:
            raise ValidationError("comparison matrix is not reciprocal (m_ij * m_ji != 1)")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "criterion_labels", tuple(self.criterion_labels))

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def check_judgment_scale(matrix: ComparisonMatrix, tol: float = 1e-9) -> None:
    """Reject matrices whose off-diagonal entries leave the 1-5 judgment set.

    Applied to user-entered matrices at the ingestion boundary only.
    """
    m = matrix.entries
    for i in range(matrix.n):
        for j in range(matrix.n):
            if i == j:
                continue
            if not any(abs(m[i, j] - v) <= tol for v in JUDGMENT_SCALE):
                raise ValidationError(
                    f"entry ({matrix.criterion_labels[i]}, {matrix.criterion_labels[j]}) "
                    f"= {m[i, j]} is outside the 1-5 judgment scale",
                    field=f"matrix[{i}][{j}]",
                )


@dataclass(frozen=True)
class ExpertJudgment:
    """A single expert's submitted comparison matrix plus identity metadata."""

    expert_id: str
    role: str
    matrix: ComparisonMatrix
    submitted_at: str = ""

    def __post_init__(self):
        if not self.expert_id:
            raise ValidationError("expert_id must be non-empty", field="expert_id")


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Non-negative criterion weights summing to 1."""

    values: np.ndarray
    criterion_labels: tuple[str, ...] = DEFAULT_CRITERIA

    def __post_init__(self):
        w = np.asarray(self.values, dtype=float)
        if w.ndim != 1:
            raise ValidationError("weights must be a vector")
        if len(self.criterion_labels) != w.shape[0]:
            raise ValidationError("weights and criterion labels disagree in length")
        if np.any(w < 0):
            raise ValidationError("weights must be non-negative")
        if abs(float(w.sum()) - 1.0) > 1e-9:
            raise ValidationError(f"weights must sum to 1, got {w.sum()!r}")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "values", w)
        object.__setattr__(self, "criterion_labels", tuple(self.criterion_labels))

    def as_dict(self) -> dict[str, float]:
        return {label: float(v) for label, v in zip(self.criterion_labels, self.values)}


@dataclass(frozen=True)
class ConsistencyReport:
    """Consistency diagnostics for one comparison matrix."""

    lambda_max: float
    ci: float
    ri: float
    cr: float
    accepted: bool
    threshold: float = DEFAULT_CR_THRESHOLD


def normalize_matrix(matrix: ComparisonMatrix) -> np.ndarray:
    """Divide each entry by its column sum; every column of the result sums to 1."""
    m = matrix.entries
    return m / m.sum(axis=0, keepdims=True)


def derive_weights(matrix: ComparisonMatrix) -> WeightVector:
    """Weights as row means of the column-normalized matrix."""
    normalized = normalize_matrix(matrix)
    w = normalized.mean(axis=1)
    w = w / w.sum()  # guard against float drift; already ~1
    return WeightVector(w, matrix.criterion_labels)


def lambda_max(matrix: ComparisonMatrix, weights: WeightVector) -> float:
    """Saaty's principal-eigenvalue estimate: mean over i of (M w)_i / w_i.

    Requires strictly positive weights.
    """
    w = weights.values
    if np.any(w == 0):
        raise DegenerateWeightsError("lambda_max requires strictly positive weights")
    mw = matrix.entries @ w
    return float(np.mean(mw / w))


def consistency(
    matrix: ComparisonMatrix, threshold: float = DEFAULT_CR_THRESHOLD
) -> ConsistencyReport:
    """CI, CR, and the accept/reject decision for one matrix.

    CI = (lambda_max - n) / (n - 1); CR = CI / RI with RI from the
    random-index table (CR defined as 0 when RI = 0, i.e. n <= 2).
    """
    n = matrix.n
    if n > 10:
        raise UnsupportedDimensionError(
            f"no random-index value for n={n}; supported range is 1..10"
        )
    weights = derive_weights(matrix)
    lam = lambda_max(matrix, weights)
    ci = (lam - n) / (n - 1) if n >= 2 else 0.0
    ri = RANDOM_INDEX[n]
    cr = ci / ri if ri > 0 else 0.0
    return ConsistencyReport(
        lambda_max=lam, ci=ci, ri=ri, cr=cr,
        accepted=cr <= threshold, threshold=threshold,
    )


def aggregate_experts(
    judgments: list[ExpertJudgment], threshold: float = DEFAULT_CR_THRESHOLD
) -> tuple[WeightVector, list[ConsistencyReport]]:
    """Combine accepted experts' weight vectors by element-wise geometric mean.

    Each judgment gets a consistency report (returned in input order);
    rejected experts are excluded from the aggregate. The geometric mean is
    renormalized to sum 1.
    """
    if not judgments:
        raise ValidationError("at least one expert judgment is required")
    labels = judgments[0].matrix.criterion_labels
    for j in judgments:
        if j.matrix.criterion_labels != labels:
            raise ValidationError("all judgments must share the same criteria")

    reports = [consistency(j.matrix, threshold) for j in judgments]
    accepted = [
        derive_weights(j.matrix).values
        for j, r in zip(judgments, reports)
        if r.accepted
    ]
    if not accepted:
        raise NoAcceptedJudgmentsError(
            f"all {len(judgments)} expert judgments exceed the CR threshold {threshold}"
        )
    log_mean = np.mean(np.log(np.vstack(accepted)), axis=0)
    gm = np.exp(log_mean)
    return WeightVector(gm / gm.sum(), labels), reports


def consistent_matrix(weights, labels=DEFAULT_CRITERIA) -> ComparisonMatrix:
    """Build the perfectly consistent matrix m_ij = w_i / w_j from positive weights."""
    w = np.asarray(weights, dtype=float)
    if np.any(w <= 0):
        raise ValidationError("weights must be strictly positive")
    m = w[:, None] / w[None, :]
    np.fill_diagonal(m, 1.0)
    return ComparisonMatrix(m, tuple(labels))
