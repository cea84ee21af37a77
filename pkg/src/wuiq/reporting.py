"""Report rendering: delimited exports and SVG charts.

Charts are written as SVG with a fixed hash salt and no embedded
timestamp, so rendering the same project state twice produces identical
bytes. That keeps report artifacts diffable and lets downstream checks
compare them byte for byte.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .engine import build_report  # noqa: E402
from .errors import ValidationError  # noqa: E402
from .store import ProjectStore  # noqa: E402

_SVG_SALT = "wuiq-report"
_FIGSIZE = (8.0, 4.5)

_CLUSTER_COLORS = plt.rcParams["axes.prop_cycle"].by_key()["color"]


def _new_figure():
    plt.rcParams["svg.hashsalt"] = _SVG_SALT
    return plt.subplots(figsize=_FIGSIZE)


def _save(fig, path: Path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def write_delimited(path: Path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def render_scree_chart(segments: dict, path: Path):
    """SSE versus cluster count, with the selected k marked."""
    points = segments["scree"]
    ks = [p["k"] for p in points]
    sses = [p["sse"] for p in points]
    fig, ax = _new_figure()
    ax.plot(ks, sses, marker="o", color=_CLUSTER_COLORS[0])
    chosen = segments["k"]
    if chosen in ks:
        ax.axvline(chosen, linestyle="--", color=_CLUSTER_COLORS[3], linewidth=1)
        ax.annotate(f"k = {chosen}", (chosen, sses[ks.index(chosen)]),
                    textcoords="offset points", xytext=(8, 8))
    ax.set_xlabel("clusters")
    ax.set_ylabel("within-cluster sum of squares")
    ax.set_title("Cluster count selection")
    ax.set_xticks(ks)
    fig.tight_layout()
    _save(fig, path)


def render_segment_chart(segments: dict, path: Path) -> bool:
    """Respondents in raw feature space colored by cluster (2-feature runs only)."""
    names = segments["feature_names"]
    if len(names) != 2:
        return False
    mean = segments["standardization"]["mean"]
    std = segments["standardization"]["std"]
    labels = segments["labels"]
    values = segments["values"]
    centroids = segments["centroids"]
    fig, ax = _new_figure()
    for c in range(segments["k"]):
        color = _CLUSTER_COLORS[c % len(_CLUSTER_COLORS)]
        xs = [v[0] for v, label in zip(values, labels) if label == c]
        ys = [v[1] for v, label in zip(values, labels) if label == c]
        ax.scatter(xs, ys, s=24, color=color, alpha=0.8,
                   label=f"cluster {c} (n={len(xs)})")
        # Centroids live in standardized space; map back to raw units.
        cx = centroids[c][0] * std[0] + mean[0]
        cy = centroids[c][1] * std[1] + mean[1]
        ax.scatter([cx], [cy], marker="X", s=120, color=color,
                   edgecolors="black", linewidths=0.8, zorder=3)
    ax.set_xlabel(names[0])
    ax.set_ylabel(names[1])
    ax.set_title("Respondent segments")
    ax.legend()
    fig.tight_layout()
    _save(fig, path)
    return True


def render_history_chart(iterations: dict, path: Path):
    """Quality score across evaluation iterations."""
    its = iterations["iterations"]
    ts = [it["t"] for it in its]
    values = [it["wuiq"] for it in its]
    fig, ax = _new_figure()
    ax.plot(ts, values, marker="o", color=_CLUSTER_COLORS[0])
    for t, v in zip(ts, values):
        ax.annotate(f"{v:.3f}", (t, v), textcoords="offset points", xytext=(0, 8),
                    ha="center", fontsize=8)
    ax.set_xlabel("iteration")
    ax.set_ylabel("quality score")
    ax.set_ylim(0.0, 1.0)
    ax.set_xticks(ts)
    ax.set_title("Quality score over iterations")
    fig.tight_layout()
    _save(fig, path)


def render_attribution_chart(explanations: dict, path: Path):
    """Global importance bars plus per-instance attribution points.

    Bars show mean absolute attribution per group, most important at the
    top. Each respondent's attribution is overlaid as a point, colored by
    sign: toward the cluster or away from it.
    """
    importance = explanations["global_importance"]
    groups = [g["group"] for g in importance]
    means = [g["mean_abs_phi"] for g in importance]
    by_group: dict[str, list[float]] = {g: [] for g in groups}
    for row in explanations["attributions"]:
        if row["group"] in by_group:
            by_group[row["group"]].append(row["phi"])
    fig, ax = _new_figure()
    y = list(range(len(groups)))[::-1]
    ax.barh(y, means, color=_CLUSTER_COLORS[0], alpha=0.35, zorder=1)
    for pos, group in zip(y, groups):
        phis = by_group[group]
        colors = [_CLUSTER_COLORS[3] if p > 0 else _CLUSTER_COLORS[0] for p in phis]
        ax.scatter([abs(p) for p in phis], [pos] * len(phis),
                   s=14, color=colors, zorder=2)
    ax.set_yticks(y)
    ax.set_yticklabels(groups)
    ax.set_xlabel("attribution magnitude")
    ax.set_title(
        f"Cluster {explanations['cluster']} membership drivers "
        f"({explanations['mode']} mode)"
    )
    fig.tight_layout()
    _save(fig, path)


def export_report(store: ProjectStore, outdir: Path | str) -> list[str]:
    """Write the consolidated report and every derivable chart/table.

    Returns the written file names. Sections whose inputs are missing are
    skipped rather than failing the whole report.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    report = build_report(store)
    written = []

    path = outdir / "report.json"
    path.write_text(
        json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    written.append(path.name)

    weights = report["weights"]
    if weights:
        write_delimited(
            outdir / "weights.csv",
            ("criterion", "weight"),
            [(c, repr(weights["weights"][c])) for c in weights["criteria"]],
        )
        written.append("weights.csv")

    iterations = report["iterations"]
    if iterations and iterations["iterations"]:
        write_delimited(
            outdir / "iterations.csv",
            ("t", "performance", "accessibility", "usability", "wuiq", "grade",
             "evaluated_at"),
            [
                (it["t"], repr(it["scores"]["performance"]),
                 repr(it["scores"]["accessibility"]),
                 repr(it["scores"]["usability"]), repr(it["wuiq"]), it["grade"],
                 it["evaluated_at"])
                for it in iterations["iterations"]
            ],
        )
        written.append("iterations.csv")
        render_history_chart(iterations, outdir / "history.svg")
        written.append("history.svg")

    segments = report["segments"]
    if segments:
        write_delimited(
            outdir / "scree.csv",
            ("k", "sse"),
            [(p["k"], repr(p["sse"])) for p in segments["scree"]],
        )
        written.append("scree.csv")
        feature_names = segments["feature_names"]
        write_delimited(
            outdir / "segments.csv",
            ("cluster", "size") + tuple(feature_names),
            [
                (cl["cluster"], cl["size"])
                + tuple(repr(cl[name]) for name in feature_names)
                for cl in segments["clusters"]
            ],
        )
        written.append("segments.csv")
        render_scree_chart(segments, outdir / "scree.svg")
        written.append("scree.svg")
        if render_segment_chart(segments, outdir / "segments.svg"):
            written.append("segments.svg")

    explanations = report["explanations"]
    if explanations:
        write_delimited(
            outdir / "attributions.csv",
            ("instance", "cluster", "group", "phi", "group_value", "base_value",
             "direction"),
            [
                (row["instance"], row["cluster"], row["group"], repr(row["phi"]),
                 repr(row["group_value"]), repr(row["base_value"]), row["direction"])
                for row in explanations["attributions"]
            ],
        )
        written.append("attributions.csv")
        render_attribution_chart(explanations, outdir / "attributions.svg")
        written.append("attributions.svg")

    return written
