/**
 * Analyst dashboards over the consolidated report document. Charts are
 * hand-rolled SVG strings; every plotted number is lifted straight from the
 * service response, the functions here only turn values into coordinates.
 */

import {
  ApiClient,
  ExplanationsDocument,
  Iteration,
  ReportDocument,
  SegmentsDocument,
  ServiceUnreachable,
  WeightsDocument,
} from "./api.js";

const WIDTH = 520;
const HEIGHT = 240;
const PAD = 36;

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function svgOpen(cls: string): string {
  return (
    `<svg class="chart ${cls}" viewBox="0 0 ${WIDTH} ${HEIGHT}"` +
    ` role="img" xmlns="http://www.w3.org/2000/svg">`
  );
}

function xScale(i: number, n: number): number {
  if (n <= 1) return WIDTH / 2;
  return PAD + (i * (WIDTH - 2 * PAD)) / (n - 1);
}

function empty(message: string): string {
  return `<div class="empty-state">${esc(message)}</div>`;
}

/** Score history. A single iteration still draws: one dot, no line. */
export function renderHistory(iterations: Iteration[]): string {
  if (iterations.length === 0) {
    return empty("No evaluations yet. Run an evaluation to start the history.");
  }
  const ys = iterations.map((it) => it.wuiq);
  const y = (v: number) => HEIGHT - PAD - v * (HEIGHT - 2 * PAD);
  const points = iterations.map(
    (it, i) => [xScale(i, iterations.length), y(it.wuiq)] as const,
  );
  const path =
    points.length > 1
      ? `<polyline fill="none" stroke="#1c6ea4" stroke-width="2" points="${points
          .map(([px, py]) => `${px.toFixed(1)},${py.toFixed(1)}`)
          .join(" ")}"/>`
      : "";
  const dots = points
    .map(
      ([px, py], i) =>
        `<circle cx="${px.toFixed(1)}" cy="${py.toFixed(1)}" r="4" fill="#1c6ea4">` +
        `<title>t=${iterations[i]!.t}: ${iterations[i]!.display} (${esc(iterations[i]!.grade)})</title></circle>`,
    )
    .join("");
  const labels = iterations
    .map(
      (it, i) =>
        `<text x="${xScale(i, iterations.length).toFixed(1)}" y="${HEIGHT - 10}"` +
        ` text-anchor="middle" class="tick">t=${it.t}</text>`,
    )
    .join("");
  const latest = iterations[iterations.length - 1]!;
  return (
    `<section class="panel panel-history"><h3>Quality score over iterations</h3>` +
    `<p class="panel-lead">latest: <strong>${latest.display}</strong> &middot; ${esc(latest.grade)}</p>` +
    svgOpen("chart-history") +
    `${grid01()}${path}${dots}${labels}</svg></section>`
  );
}

function grid01(): string {
  const lines: string[] = [];
  for (const v of [0, 0.25, 0.5, 0.75, 1]) {
    const gy = HEIGHT - PAD - v * (HEIGHT - 2 * PAD);
    lines.push(
      `<line x1="${PAD}" y1="${gy}" x2="${WIDTH - PAD}" y2="${gy}" stroke="#ddd"/>`,
      `<text x="${PAD - 6}" y="${gy + 4}" text-anchor="end" class="tick">${v}</text>`,
    );
  }
  return lines.join("");
}

/**
 * Weighted contribution of each criterion to the latest score. Bar length
 * is weight times criterion score (geometry only; both factors are shown
 * verbatim from the service).
 */
export function renderContributions(
  iteration: Iteration,
  weights: WeightsDocument,
): string {
  const rows = weights.criteria
    .map((name) => {
      const w = weights.weights[name] ?? 0;
      const s = iteration.scores[name] ?? 0;
      const frac = Math.max(0, Math.min(1, w * s));
      return (
        `<div class="contrib-row"><span class="contrib-name">${esc(name)}</span>` +
        `<span class="contrib-bar"><span class="contrib-fill" style="width:${(frac * 100).toFixed(2)}%"></span></span>` +
        `<span class="contrib-detail">w ${w.toFixed(4)} &times; s ${s.toFixed(4)}</span></div>`
      );
    })
    .join("\n");
  return (
    `<section class="panel panel-contrib"><h3>Per-criterion contribution (iteration t=${iteration.t})</h3>` +
    `<div class="contrib">${rows}</div></section>`
  );
}

/** Scree curve with the selected cluster count circled. */
export function renderScree(segments: SegmentsDocument): string {
  const scree = segments.scree;
  if (scree.length === 0) return empty("No scree data recorded.");
  const maxSse = Math.max(...scree.map((p) => p.sse));
  const y = (sse: number) =>
    HEIGHT - PAD - (maxSse > 0 ? (sse / maxSse) * (HEIGHT - 2 * PAD) : 0);
  const pts = scree.map(
    (p, i) => [xScale(i, scree.length), y(p.sse), p] as const,
  );
  const line = `<polyline fill="none" stroke="#444" stroke-width="2" points="${pts
    .map(([px, py]) => `${px.toFixed(1)},${py.toFixed(1)}`)
    .join(" ")}"/>`;
  const marks = pts
    .map(([px, py, p]) => {
      const chosen = p.k === segments.k;
      const ring = chosen
        ? `<circle cx="${px.toFixed(1)}" cy="${py.toFixed(1)}" r="9" fill="none" stroke="#c0392b" stroke-width="2" data-selected-k="${p.k}"/>`
        : "";
      return (
        `${ring}<circle cx="${px.toFixed(1)}" cy="${py.toFixed(1)}" r="3.5" fill="#444">` +
        `<title>k=${p.k}: SSE ${p.sse.toFixed(4)}</title></circle>` +
        `<text x="${px.toFixed(1)}" y="${HEIGHT - 10}" text-anchor="middle" class="tick">${p.k}</text>`
      );
    })
    .join("");
  const how = segments.k_selection === "elbow" ? "elbow-selected" : "requested";
  return (
    `<section class="panel panel-scree"><h3>Cluster count selection</h3>` +
    `<p class="panel-lead">k = <strong>${segments.k}</strong> (${how})</p>` +
    svgOpen("chart-scree") +
    `${line}${marks}</svg></section>`
  );
}

/** Cluster summary table: size plus the mean of each raw feature. */
export function renderClusterTable(segments: SegmentsDocument): string {
  const features = segments.feature_names;
  const header =
    `<tr><th>cluster</th><th>size</th>` +
    features.map((f) => `<th>${esc(f)} (mean)</th>`).join("") +
    `</tr>`;
  const rows = segments.clusters
    .map((c) => {
      const cells = features
        .map((f) => `<td>${Number(c[f]).toFixed(2)}</td>`)
        .join("");
      return `<tr><td>${c.cluster}</td><td>${c.size}</td>${cells}</tr>`;
    })
    .join("\n");
  return (
    `<section class="panel panel-clusters"><h3>Segments</h3>` +
    `<table class="cluster-table"><thead>${header}</thead><tbody>${rows}</tbody></table></section>`
  );
}

/**
 * Per-instance attribution bars for one cluster. Sign carries the color:
 * red pushes membership up, blue pushes it down.
 */
export function renderAttributions(doc: ExplanationsDocument): string {
  const maxAbs = Math.max(1e-12, ...doc.attributions.map((r) => Math.abs(r.phi)));
  const rows = doc.attributions
    .map((r) => {
      const frac = Math.abs(r.phi) / maxAbs;
      const side = r.phi >= 0 ? "attr-pos" : "attr-neg";
      return (
        `<div class="attr-row" data-instance="${esc(r.instance)}" data-group="${esc(r.group)}">` +
        `<span class="attr-label">${esc(r.instance)} &middot; ${esc(r.group)}</span>` +
        `<span class="attr-bar"><span class="attr-fill ${side}" style="width:${(frac * 100).toFixed(2)}%"></span></span>` +
        `<span class="attr-value">${r.phi.toFixed(4)}</span>` +
        `<span class="attr-direction">${esc(r.direction)}</span></div>`
      );
    })
    .join("\n");
  const top = doc.global_importance
    .map((g) => `<li>${esc(g.group)}: ${g.mean_abs_phi.toFixed(5)}</li>`)
    .join("");
  return (
    `<section class="panel panel-attr"><h3>Cluster ${doc.cluster} membership attributions (${esc(doc.mode)})</h3>` +
    `<p class="panel-lead">base value ${doc.base_value.toFixed(4)};` +
    ` <span class="attr-key"><span class="attr-pos-key">red raises membership</span>,` +
    ` <span class="attr-neg-key">blue lowers it</span></span></p>` +
    `<ol class="attr-importance">${top}</ol>` +
    `<div class="attr-rows">${rows}</div></section>`
  );
}

/** Assemble every panel the document supports; missing parts get guidance. */
export function renderReport(report: ReportDocument): string {
  const parts: string[] = [];
  if (report.iterations && report.iterations.iterations.length > 0) {
    parts.push(renderHistory(report.iterations.iterations));
    const latest =
      report.iterations.iterations[report.iterations.iterations.length - 1]!;
    if (report.weights) parts.push(renderContributions(latest, report.weights));
  } else {
    parts.push(
      empty(
        "No evaluations yet. Ingest surveys and an audit, freeze weights, then evaluate.",
      ),
    );
  }
  if (report.segments) {
    parts.push(renderScree(report.segments));
    parts.push(renderClusterTable(report.segments));
  } else {
    parts.push(empty("No segmentation yet. Run segment once surveys are in."));
  }
  if (report.explanations) {
    parts.push(renderAttributions(report.explanations));
  } else {
    parts.push(empty("No attributions yet. Explain a cluster after segmenting."));
  }
  return `<div class="report-views">${parts.join("\n")}</div>`;
}

export function mountReports(
  container: HTMLElement,
  client: ApiClient,
): Promise<void> {
  return client
    .report()
    .then((report) => {
      container.innerHTML = renderReport(report);
    })
    .catch((err) => {
      if (err instanceof ServiceUnreachable) {
        container.innerHTML = empty("Service unreachable; refresh to retry.");
        return;
      }
      throw err;
    });
}
