"""Exact Shapley attributions for cluster-membership functions.

The membership of an instance in a target cluster is treated as a game
whose players are named feature groups. With M groups the 2^M coalitions
are enumerated exactly; a coalition's value is the membership function
averaged over the background set with the instance's values spliced in on
the coalition's features (interventional imputation). Exact enumeration
makes the efficiency axiom hold by construction: attributions plus the
base value reproduce the prediction to within float noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError, WuiqError
from .segmentation import KMeansModel, Standardization
from .usability import softmax

#: Hard cap on the number of groups; 2^M coalitions are enumerated.
MAX_GROUPS = 15


class EnumerationCapError(WuiqError):
    """Group count exceeds the exact-enumeration cap; regroup features coarser."""

    code = "enumeration_cap"


@dataclass(frozen=True, eq=False)
class FeatureGrouping:
    """Partition of the feature columns into named attribution groups."""

    groups: tuple[tuple[str, tuple[str, ...]], ...]

    def __post_init__(self):
        seen: set[str] = set()
        for name, members in self.groups:
            if not members:
                raise ValidationError(f"group {name!r} has no features")
            for feature in members:
                if feature in seen:
                    raise ValidationError(f"feature {feature!r} appears in two groups")
                seen.add(feature)
        if not 1 <= len(self.groups) <= MAX_GROUPS:
            raise EnumerationCapError(
                f"{len(self.groups)} groups exceeds the cap of {MAX_GROUPS}; "
                "merge features into coarser groups"
            )

    @classmethod
    def from_dict(cls, mapping: dict) -> "FeatureGrouping":
        return cls(tuple((name, tuple(members)) for name, members in mapping.items()))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.groups)

    def column_indices(self, feature_names) -> list[np.ndarray]:
        """Column index arrays per group, resolved against a feature layout."""
        position = {name: i for i, name in enumerate(feature_names)}
        out = []
        for name, members in self.groups:
            missing = [m for m in members if m not in position]
            if missing:
                raise ValidationError(
                    f"group {name!r} references unknown feature(s): {', '.join(missing)}"
                )
            out.append(np.array([position[m] for m in members], dtype=int))
        return out


@dataclass(frozen=True, eq=False)
class BackgroundSet:
    """Feature rows used to impute features outside a coalition."""

    values: np.ndarray
    feature_names: tuple[str, ...]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] < 1:
            raise ValidationError("background set must hold at least one row")
        if len(self.feature_names) != v.shape[1]:
            raise ValidationError("background feature_names must match column count")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))


class MembershipFunction:
    """Black-box f(x): membership of a feature row in one target cluster.

    ``indicator`` mode returns 1.0 when the row's nearest centroid (ties to
    the lowest index, as in fitting) is the target cluster, else 0.0.
    ``soft`` mode returns the target component of a softmax over negative
    squared centroid distances, a value in (0, 1).

    ``transform`` optionally maps instance-feature rows into the model's
    raw feature space (e.g. survey items to a derived usability score);
    ``standardization`` then applies the stored per-feature scaling.
    """

    def __init__(
        self,
        model: KMeansModel,
        target_cluster: int,
        mode: str = "indicator",
        standardization: Standardization | None = None,
        transform=None,
    ):
        if not 0 <= target_cluster < model.k:
            raise ValidationError(
                f"target cluster {target_cluster} out of range 0..{model.k - 1}"
            )
        if mode not in ("indicator", "soft"):
            raise ValidationError(f"unknown membership mode {mode!r}")
        self.model = model
        self.target_cluster = target_cluster
        self.mode = mode
        self.standardization = standardization
        self.transform = transform

    def __call__(self, rows: np.ndarray) -> np.ndarray:
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        if self.transform is not None:
            rows = np.atleast_2d(self.transform(rows))
        if self.standardization is not None:
            rows = (rows - self.standardization.mean) / self.standardization.std
        diff = rows[:, None, :] - self.model.centroids[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        if self.mode == "indicator":
            return (np.argmin(d2, axis=1) == self.target_cluster).astype(float)
        return np.array([softmax(-row)[self.target_cluster] for row in d2])


@dataclass(frozen=True)
class ShapExplanation:
    """Per-group attributions for one instance's membership value."""

    instance_id: str
    base_value: float
    phi: tuple[tuple[str, float], ...]
    prediction: float
    efficiency_residual: float
    target_cluster: int | None = None
    group_values: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        if self.efficiency_residual > 1e-9:
            raise ValidationError(
                f"efficiency residual {self.efficiency_residual} exceeds 1e-9"
            )

    def phi_dict(self) -> dict[str, float]:
        return dict(self.phi)


def _coalition_values(f, x: np.ndarray, background: BackgroundSet, columns) -> np.ndarray:
    """Mean of f over the background with x spliced in per coalition bitmask."""
    m = len(columns)
    bg = background.values
    values = np.empty(1 << m)
    for mask in range(1 << m):
        composite = bg.copy()
        for g in range(m):
            if mask >> g & 1:
                composite[:, columns[g]] = x[columns[g]]
        values[mask] = float(np.mean(f(composite)))
    return values


def shapley_exact(
    f,
    x,
    background: BackgroundSet,
    grouping: FeatureGrouping,
    instance_id: str = "",
    target_cluster: int | None = None,
) -> ShapExplanation:
    """Exact Shapley attribution of f(x) across the grouping's groups.

    phi_i sums, over every coalition S of other groups, the weighted
    marginal contribution w(|S|) * (v(S + i) - v(S)) with
    w(s) = s! (M - s - 1)! / M!. The base value is the empty-coalition
    value (mean of f over the background).
    """
    m = len(grouping.groups)
    if m > MAX_GROUPS:
        raise EnumerationCapError(
            f"{m} groups exceeds the cap of {MAX_GROUPS}; merge features coarser"
        )
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != background.values.shape[1]:
        raise ValidationError("instance and background disagree on feature count")
    columns = grouping.column_indices(background.feature_names)

    v = _coalition_values(f, x, background, columns)
    fact = [math.factorial(i) for i in range(m + 1)]
    weights = [fact[s] * fact[m - s - 1] / fact[m] for s in range(m)]

    phi = np.zeros(m)
    full = (1 << m) - 1
    for mask in range(1 << m):
        size = bin(mask).count("1")
        for g in range(m):
            if mask >> g & 1:
                continue
            phi[g] += weights[size] * (v[mask | (1 << g)] - v[mask])

    base = float(v[0])
    prediction = float(v[full])
    residual = abs(float(phi.sum()) + base - prediction)
    group_values = tuple(
        (name, float(np.mean(x[cols])))
        for (name, _), cols in zip(grouping.groups, columns)
    )
    return ShapExplanation(
        instance_id=instance_id,
        base_value=base,
        phi=tuple(zip(grouping.names, (float(p) for p in phi))),
        prediction=prediction,
        efficiency_residual=residual,
        target_cluster=target_cluster,
        group_values=group_values,
    )


def explain_cluster(
    model: KMeansModel,
    data,
    grouping: FeatureGrouping,
    target_cluster: int,
    mode: str = "indicator",
    background: BackgroundSet | None = None,
    standardization: Standardization | None = None,
    transform=None,
    instance_ids=None,
) -> tuple[list[ShapExplanation], float]:
    """One exact explanation per data row for membership in the target cluster.

    ``data`` holds the instance-feature rows (same layout the membership
    transform expects). The background defaults to the data itself, so in
    indicator mode the base value is the background fraction assigned to
    the target cluster.
    """
    rows = np.atleast_2d(np.asarray(getattr(data, "values", data), dtype=float))
    feature_names = tuple(getattr(data, "feature_names", ()) or
                          tuple(f"f{i}" for i in range(rows.shape[1])))
    if background is None:
        background = BackgroundSet(rows, feature_names)
    f = MembershipFunction(
        model, target_cluster, mode=mode,
        standardization=standardization, transform=transform,
    )
    ids = list(instance_ids) if instance_ids is not None else [
        str(i) for i in range(rows.shape[0])
    ]
    if len(ids) != rows.shape[0]:
        raise ValidationError("instance_ids length must match the data rows")
    explanations = [
        shapley_exact(f, row, background, grouping,
                      instance_id=ids[i], target_cluster=target_cluster)
        for i, row in enumerate(rows)
    ]
    base = explanations[0].base_value if explanations else float(np.mean(f(background.values)))
    return explanations, base


def global_importance(explanations: list[ShapExplanation]) -> list[tuple[str, float]]:
    """Mean absolute attribution per group, sorted descending (ties keep input order)."""
    if not explanations:
        raise ValidationError("global importance requires at least one explanation")
    names = [name for name, _ in explanations[0].phi]
    totals = np.zeros(len(names))
    for e in explanations:
        values = dict(e.phi)
        if list(values) != names:
            raise ValidationError("explanations disagree on group names")
        totals += np.abs(np.array([values[n] for n in names]))
    means = totals / len(explanations)
    order = sorted(range(len(names)), key=lambda i: (-means[i], i))
    return [(names[i], float(means[i])) for i in order]


def export_attribution_data(explanations: list[ShapExplanation]) -> list[dict]:
    """Flat attribution rows: one per (instance, group), deterministic ordering.

    Sign reading: phi > 0 increases membership in the target cluster,
    phi < 0 decreases it.
    """
    if not explanations:
        raise ValidationError("attribution export requires at least one explanation")
    rows = []
    for e in explanations:
        group_values = dict(e.group_values)
        for name, value in e.phi:
            rows.append({
                "instance": e.instance_id,
                "cluster": e.target_cluster,
                "group": name,
                "phi": value,
                "group_value": group_values.get(name),
                "base_value": e.base_value,
                "direction": "increases membership" if value > 0
                             else "decreases membership" if value < 0 else "neutral",
            })
    return rows
