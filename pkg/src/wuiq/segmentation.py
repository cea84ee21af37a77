"""User segmentation: feature standardization, k-means, and elbow selection.

Lloyd iterations alternate nearest-centroid assignment (squared Euclidean
distance, ties to the lowest centroid index) with mean centroid updates,
so the within-cluster sum of squares never increases. Initialization is
seeded k-means++ by default; plain random-point initialization is
available behind a flag. Identical (data, k, seed) always produce the
identical model.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True, eq=False)
class Standardization:
    """Per-feature mean and standard deviation used to standardize a matrix."""

    mean: np.ndarray
    std: np.ndarray


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Observations (rows) over named features (columns), no missing values."""

    values: np.ndarray
    feature_names: tuple[str, ...]
    standardization: Standardization | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ValidationError("feature matrix must be 2-dimensional")
        if v.shape[0] < 1 or v.shape[1] < 1:
            raise ValidationError("feature matrix needs at least one row and one column")
        if len(self.feature_names) != v.shape[1]:
            raise ValidationError("feature_names length must match column count")
        if not np.all(np.isfinite(v)):
            raise ValidationError("feature matrix must not contain missing values")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


def standardize(x: FeatureMatrix) -> FeatureMatrix:
    """Transform each column to (v - mean) / std with the population std.

    Zero-variance columns map to all zeros and record std = 1 so the
    transform stays invertible.
    """
    mean = x.values.mean(axis=0)
    std = x.values.std(axis=0)
    std = np.where(std == 0.0, 1.0, std)
    return FeatureMatrix(
        (x.values - mean) / std,
        x.feature_names,
        standardization=Standardization(mean=mean, std=std),
    )


@dataclass(frozen=True, eq=False)
class KMeansModel:
    """A fitted clustering: centroids, per-point labels, and the SSE objective."""

    k: int
    centroids: np.ndarray
    labels: np.ndarray
    sse: float
    iterations_run: int
    seed: int

    @property
    def assignments(self) -> np.ndarray:
        """Binary indicator matrix (n x k) with exactly one 1 per row."""
        z = np.zeros((self.labels.shape[0], self.k), dtype=int)
        z[np.arange(self.labels.shape[0]), self.labels] = 1
        return z


@dataclass(frozen=True)
class ScreePoint:
    """One (cluster count, best SSE) point of the scree curve."""

    k: int
    sse: float

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError("k must be >= 1")
        if self.sse < -1e-12:
            raise ValidationError("sse must be non-negative")


def _squared_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def _sse(points: np.ndarray, centroids: np.ndarray, labels: np.ndarray) -> float:
    diff = points - centroids[labels]
    return float(np.einsum("ij,ij->", diff, diff))


def _init_kmeanspp(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    first = int(rng.integers(n))
    chosen = [first]
    d2 = np.einsum("ij,ij->i", points - points[first], points - points[first])
    for _ in range(k - 1):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        chosen.append(idx)
        cand = np.einsum("ij,ij->i", points - points[idx], points - points[idx])
        d2 = np.minimum(d2, cand)
    return points[chosen].copy()


def _init_random(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    idx = rng.choice(points.shape[0], size=k, replace=False)
    return points[idx].copy()


def _update_centroids(points, labels, centroids):
    """Mean update; empty clusters keep their previous centroid."""
    k = centroids.shape[0]
    new = centroids.copy()
    for c in range(k):
        members = labels == c
        if members.any():
            new[c] = points[members].mean(axis=0)
    return new


def kmeans(
    x: FeatureMatrix,
    k: int,
    seed: int = 0,
    max_iter: int = 300,
    tol: float = 1e-9,
    init: str = "k-means++",
    validate: bool = False,
) -> KMeansModel:
    """Fit k clusters with Lloyd's algorithm.

    Assignment ties go to the lowest centroid index. An empty cluster is
    reseeded with the point farthest from its own centroid, which is
    deterministic. Stops when the largest centroid movement falls below
    ``tol`` or after ``max_iter`` iterations. With ``validate`` set, the
    per-iteration SSE sequence is asserted non-increasing.
    """
    points = x.values
    n = points.shape[0]
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if k > n:
        raise ValidationError(f"k={k} exceeds the number of observations n={n}")
    if max_iter < 1:
        raise ValidationError("max_iter must be >= 1")
    if init not in ("k-means++", "random"):
        raise ValidationError(f"unknown init {init!r}; use 'k-means++' or 'random'")

    rng = np.random.default_rng(seed)
    centroids = (_init_kmeanspp if init == "k-means++" else _init_random)(points, k, rng)

    last_sse = np.inf
    iterations_run = 0
    for _ in range(max_iter):
        iterations_run += 1
        labels = np.argmin(_squared_distances(points, centroids), axis=1)

        counts = np.bincount(labels, minlength=k)
        if np.any(counts == 0):
            used: set[int] = set()
            point_d2 = np.einsum(
                "ij,ij->i", points - centroids[labels], points - centroids[labels]
            )
            for c in np.flatnonzero(counts == 0):
                order = np.argsort(-point_d2, kind="stable")
                far = next((int(i) for i in order if int(i) not in used), None)
                if far is None:
                    break
                used.add(far)
                centroids[c] = points[far]
            labels = np.argmin(_squared_distances(points, centroids), axis=1)

        new_centroids = _update_centroids(points, labels, centroids)
        if validate:
            current = _sse(points, new_centroids, labels)
            assert current <= last_sse + 1e-9, "SSE increased across an iteration"
            last_sse = current
        movement = float(np.max(np.linalg.norm(new_centroids - centroids, axis=1)))
        centroids = new_centroids
        if movement < tol:
            break

    labels = np.argmin(_squared_distances(points, centroids), axis=1)
    centroids = _update_centroids(points, labels, centroids)
    centroids.flags.writeable = False
    labels.flags.writeable = False
    return KMeansModel(
        k=k,
        centroids=centroids,
        labels=labels,
        sse=_sse(points, centroids, labels),
        iterations_run=iterations_run,
        seed=seed,
    )


def scree(
    x: FeatureMatrix,
    k_min: int,
    k_max: int,
    seed: int = 0,
    restarts: int = 8,
    init: str = "k-means++",
) -> list[ScreePoint]:
    """Best SSE over independently seeded restarts, for each k in [k_min, k_max]."""
    if not 1 <= k_min <= k_max <= x.n:
        raise ValidationError(
            f"need 1 <= k_min <= k_max <= n, got k_min={k_min}, k_max={k_max}, n={x.n}"
        )
    if restarts < 1:
        raise ValidationError("restarts must be >= 1")
    points = []
    for k in range(k_min, k_max + 1):
        best = np.inf
        for r in range(restarts):
            run_seed = int(np.random.SeedSequence([seed, k, r]).generate_state(1)[0])
            model = kmeans(x, k, seed=run_seed, init=init)
            best = min(best, model.sse)
        points.append(ScreePoint(k=k, sse=float(best)))
    return points


def elbow(points: list[ScreePoint]) -> int:
    """Select k at the knee of the scree curve.

    Both axes are rescaled to the unit square; the selected k is the
    interior point farthest (perpendicular distance) from the chord
    joining the first and last points. Ties go to the smaller k.
    """
    if len(points) < 3:
        raise ValidationError("elbow selection needs at least 3 scree points")
    ks = np.array([p.k for p in points], dtype=float)
    if np.any(np.diff(ks) <= 0):
        raise ValidationError("scree points must have strictly increasing k")
    sses = np.array([p.sse for p in points], dtype=float)

    xs = (ks - ks[0]) / (ks[-1] - ks[0])
    span = sses.max() - sses.min()
    ys = (sses - sses.min()) / span if span > 0 else np.zeros_like(sses)

    x0, y0 = xs[0], ys[0]
    x1, y1 = xs[-1], ys[-1]
    chord = np.hypot(x1 - x0, y1 - y0)
    distances = np.abs((x1 - x0) * (y0 - ys) - (x0 - xs) * (y1 - y0)) / chord

    interior = distances[1:-1]
    best = int(np.argmax(interior)) + 1  # argmax takes the first (smallest k) on ties
    return int(ks[best])


def cluster_summary(model: KMeansModel, raw: FeatureMatrix) -> list[dict]:
    """Per-cluster size and raw-unit feature means, one row per cluster.

    ``raw`` must be the unstandardized matrix the model's training data was
    derived from, in the same row order.
    """
    if raw.n != model.labels.shape[0]:
        raise ValidationError("raw matrix row count disagrees with the fitted model")
    rows = []
    for c in range(model.k):
        members = model.labels == c
        size = int(members.sum())
        means = raw.values[members].mean(axis=0) if size else np.full(raw.d, np.nan)
        row = {"cluster": c, "size": size}
        row.update({name: float(v) for name, v in zip(raw.feature_names, means)})
        rows.append(row)
    return rows
