/**
 * Pairwise elicitation wizard. An expert answers every criterion pair on a
 * two-sided 5-point scale; each change triggers a consistency preview on the
 * service and the badge always shows the latest response. The consistency
 * ratio itself is never computed here.
 *
 * The only local arithmetic is the triad strain used to highlight which
 * answers to revisit after a rejection. That is a hint for the eye, not a
 * displayed score.
 */

import {
  ApiClient,
  ApiError,
  ConsistencyPreview,
  PairJudgment,
  ServiceUnreachable,
  requestToken,
} from "./api.js";

export const SCALE_VALUES = [1, 2, 3, 4, 5] as const;

export interface CriterionPair {
  first: string;
  second: string;
}

/**
 * One answered pair: who wins and by how much. The service insists that
 * value 1 pairs with favors "equal" and nothing else does, so the wizard
 * enforces the same rule at selection time.
 */
export interface PairSelection {
  favors: "first" | "second" | "equal";
  value: number;
}

export interface WizardState {
  criteria: string[];
  pairs: CriterionPair[];
  selections: Array<PairSelection | null>;
  preview: ConsistencyPreview | null;
  previewPending: boolean;
  unreachable: boolean;
  submitting: boolean;
  submitted: boolean;
  submitError: string | null;
}

/** Every unordered criterion pair, upper-triangle order. */
export function buildPairs(criteria: string[]): CriterionPair[] {
  const pairs: CriterionPair[] = [];
  for (let i = 0; i < criteria.length; i++) {
    for (let j = i + 1; j < criteria.length; j++) {
      pairs.push({ first: criteria[i]!, second: criteria[j]! });
    }
  }
  return pairs;
}

export function createWizard(criteria: string[]): WizardState {
  const pairs = buildPairs(criteria);
  return {
    criteria: [...criteria],
    pairs,
    selections: pairs.map(() => null),
    preview: null,
    previewPending: false,
    unreachable: false,
    submitting: false,
    submitted: false,
    submitError: null,
  };
}

export function selectPair(
  state: WizardState,
  index: number,
  favors: "first" | "second" | "equal",
  value: number,
): WizardState {
  if (index < 0 || index >= state.pairs.length) {
    throw new RangeError(`pair index ${index} out of range`);
  }
  if (!SCALE_VALUES.includes(value as (typeof SCALE_VALUES)[number])) {
    throw new RangeError(`scale value must be 1..5, got ${value}`);
  }
  if ((value === 1) !== (favors === "equal")) {
    throw new RangeError("value 1 means equal; larger values need a direction");
  }
  const selections = state.selections.slice();
  selections[index] = { favors, value };
  // a change outdates the previous preview; the badge shows "checking" until
  // the service answers, but only once every pair has an answer
  const complete = selections.every((s) => s !== null);
  return { ...state, selections, previewPending: complete };
}

export function isComplete(state: WizardState): boolean {
  return state.selections.every((s) => s !== null);
}

export function canSubmit(state: WizardState): boolean {
  return isComplete(state) && !state.submitting && !state.submitted;
}

/** The exact payload the preview and submit endpoints receive. */
export function judgments(state: WizardState): PairJudgment[] {
  const out: PairJudgment[] = [];
  state.selections.forEach((sel, i) => {
    if (sel === null) return;
    const pair = state.pairs[i]!;
    out.push({
      first: pair.first,
      second: pair.second,
      value: sel.value,
      favors: sel.favors,
    });
  });
  return out;
}

/**
 * Rebuild wizard selections from a judgment list (the wire format). Used to
 * restore an in-progress session and by the contract tests to replay
 * recorded requests through the same state machine.
 */
export function selectionsFromJudgments(
  state: WizardState,
  list: PairJudgment[],
): WizardState {
  let next = state;
  for (const j of list) {
    const index = state.pairs.findIndex(
      (p) => p.first === j.first && p.second === j.second,
    );
    if (index < 0) {
      throw new RangeError(`no pair (${j.first}, ${j.second}) in this wizard`);
    }
    next = selectPair(next, index, j.favors, j.value);
  }
  return next;
}

export function applyPreview(
  state: WizardState,
  preview: ConsistencyPreview,
): WizardState {
  return { ...state, preview, previewPending: false, unreachable: false };
}

export function previewFailed(state: WizardState): WizardState {
  return { ...state, previewPending: false, unreachable: true };
}

export interface TriadStrain {
  triad: [string, string, string];
  pairIndexes: number[];
  strain: number;
}

/**
 * Strain of each criterion triple: |log(m_ij * m_jk / m_ik)|, zero for a
 * perfectly transitive answer set. Sorted worst first so the wizard can
 * highlight the answers most worth revisiting. Display aid only; acceptance
 * is always the service's call.
 */
export function triadStrains(state: WizardState): TriadStrain[] {
  if (!isComplete(state)) return [];
  const ratio = new Map<string, number>();
  const pairIndex = new Map<string, number>();
  state.pairs.forEach((pair, idx) => {
    const sel = state.selections[idx]!;
    const m =
      sel.favors === "equal" ? 1 : sel.favors === "first" ? sel.value : 1 / sel.value;
    ratio.set(`${pair.first}|${pair.second}`, m);
    pairIndex.set(`${pair.first}|${pair.second}`, idx);
  });
  const m = (a: string, b: string): number => {
    const direct = ratio.get(`${a}|${b}`);
    if (direct !== undefined) return direct;
    return 1 / ratio.get(`${b}|${a}`)!;
  };
  const out: TriadStrain[] = [];
  const c = state.criteria;
  for (let i = 0; i < c.length; i++) {
    for (let j = i + 1; j < c.length; j++) {
      for (let k = j + 1; k < c.length; k++) {
        const strain = Math.abs(
          Math.log((m(c[i]!, c[j]!) * m(c[j]!, c[k]!)) / m(c[i]!, c[k]!)),
        );
        const indexes = [
          pairIndex.get(`${c[i]}|${c[j]}`)!,
          pairIndex.get(`${c[j]}|${c[k]}`)!,
          pairIndex.get(`${c[i]}|${c[k]}`)!,
        ];
        out.push({ triad: [c[i]!, c[j]!, c[k]!], pairIndexes: indexes, strain });
      }
    }
  }
  out.sort((a, b) => b.strain - a.strain);
  return out;
}

/** Pair indexes worth a second look after a rejected preview. */
export function pairsToRevisit(state: WizardState): Set<number> {
  if (!state.preview || state.preview.accepted) return new Set();
  const strains = triadStrains(state);
  if (strains.length === 0 || strains[0]!.strain === 0) return new Set();
  const worst = strains[0]!.strain;
  const marked = new Set<number>();
  for (const t of strains) {
    if (t.strain >= worst - 1e-12) t.pairIndexes.forEach((i) => marked.add(i));
  }
  return marked;
}

export function formatCr(cr: number): string {
  return cr.toFixed(4);
}

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function scaleRow(index: number, sel: PairSelection | null, marked: boolean): string {
  const cells: string[] = [];
  for (const value of [...SCALE_VALUES].reverse()) {
    if (value === 1) continue;
    const active = sel?.favors === "first" && sel.value === value;
    cells.push(
      `<label class="scale-cell"><input type="radio" name="pair-${index}"` +
        ` data-pair="${index}" data-favors="first" data-value="${value}"` +
        `${active ? " checked" : ""}><span>${value}</span></label>`,
    );
  }
  const equal = sel?.value === 1;
  cells.push(
    `<label class="scale-cell scale-equal"><input type="radio" name="pair-${index}"` +
      ` data-pair="${index}" data-favors="equal" data-value="1"` +
      `${equal ? " checked" : ""}><span>=</span></label>`,
  );
  for (const value of SCALE_VALUES) {
    if (value === 1) continue;
    const active = sel?.favors === "second" && sel.value === value;
    cells.push(
      `<label class="scale-cell"><input type="radio" name="pair-${index}"` +
        ` data-pair="${index}" data-favors="second" data-value="${value}"` +
        `${active ? " checked" : ""}><span>${value}</span></label>`,
    );
  }
  return `<div class="scale-row${marked ? " scale-row-revisit" : ""}">${cells.join("")}</div>`;
}

export function renderWizard(state: WizardState): string {
  const marked = pairsToRevisit(state);
  const rows = state.pairs
    .map((pair, i) => {
      const sel = state.selections[i] ?? null;
      return (
        `<fieldset class="pair" data-pair-row="${i}">` +
        `<legend><span class="pair-side">${esc(pair.first)}</span>` +
        ` vs <span class="pair-side">${esc(pair.second)}</span></legend>` +
        scaleRow(i, sel, marked.has(i)) +
        `</fieldset>`
      );
    })
    .join("\n");

  let badge: string;
  if (state.previewPending) {
    badge = `<span class="cr-badge cr-pending">checking&hellip;</span>`;
  } else if (state.preview) {
    const p = state.preview;
    const cls = p.accepted ? "cr-accepted" : "cr-rejected";
    const word = p.accepted ? "accepted" : "rejected";
    badge =
      `<span class="cr-badge ${cls}">CR ${formatCr(p.cr)} &middot; ${word}` +
      ` (threshold ${p.threshold})</span>`;
  } else {
    badge = `<span class="cr-badge cr-none">answer all pairs for a consistency check</span>`;
  }

  const revisitNote =
    marked.size > 0
      ? `<p class="revisit-note">The highlighted comparisons disagree with each other the most; consider revising them.</p>`
      : "";

  const banner = state.unreachable
    ? `<div class="banner banner-offline">Service unreachable. Your answers are kept; <button type="button" data-action="retry">retry</button></div>`
    : "";

  const errorNote = state.submitError
    ? `<p class="submit-error">${esc(state.submitError)}</p>`
    : "";

  const submitLabel = state.submitted ? "submitted" : "submit judgments";
  const disabled = canSubmit(state) ? "" : " disabled";

  return (
    `<div class="wizard">${banner}` +
    `<div class="wizard-pairs">${rows}</div>` +
    `<div class="wizard-status">${badge}${revisitNote}${errorNote}</div>` +
    `<button type="button" class="wizard-submit" data-action="submit"${disabled}>${submitLabel}</button>` +
    `</div>`
  );
}

export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  ms: number,
): (...args: A) => void {
  let timer: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    if (timer !== undefined) clearTimeout(timer);
    timer = setTimeout(() => fn(...args), ms);
  };
}

export interface WizardOptions {
  expertId: string;
  role: string;
  previewDelayMs?: number;
  onChange?: (state: WizardState) => void;
}

/**
 * Wire the wizard into a container. Rerenders on every state change;
 * previews are debounced so a quick sweep over the scale does not flood
 * the service.
 */
export function mountWizard(
  container: HTMLElement,
  client: ApiClient,
  criteria: string[],
  options: WizardOptions,
): { getState: () => WizardState } {
  let state = createWizard(criteria);
  const submitToken = requestToken();

  const update = (next: WizardState) => {
    state = next;
    container.innerHTML = renderWizard(state);
    options.onChange?.(state);
  };

  const requestPreview = debounce(async () => {
    if (!isComplete(state)) return;
    const payload = judgments(state);
    try {
      const preview = await client.previewJudgments(payload);
      update(applyPreview(state, preview));
    } catch (err) {
      if (err instanceof ServiceUnreachable) {
        update(previewFailed(state));
      } else {
        update({ ...state, previewPending: false });
      }
    }
  }, options.previewDelayMs ?? 250);

  const submit = async () => {
    if (!canSubmit(state)) return;
    update({ ...state, submitting: true, submitError: null });
    try {
      await client.submitExpert(
        { expert_id: options.expertId, role: options.role, judgments: judgments(state) },
        submitToken,
      );
      update({ ...state, submitting: false, submitted: true });
    } catch (err) {
      if (err instanceof ServiceUnreachable) {
        update({ ...state, submitting: false, unreachable: true });
      } else if (err instanceof ApiError) {
        update({ ...state, submitting: false, submitError: err.message });
      } else {
        throw err;
      }
    }
  };

  container.addEventListener("change", (event) => {
    const input = event.target as HTMLInputElement;
    if (!input.dataset || input.dataset.pair === undefined) return;
    const index = Number(input.dataset.pair);
    const favors =
      input.dataset.favors === "second"
        ? "second"
        : input.dataset.favors === "equal"
          ? "equal"
          : "first";
    const value = Number(input.dataset.value);
    update(selectPair(state, index, favors, value));
    requestPreview();
  });

  container.addEventListener("click", (event) => {
    const el = event.target as HTMLElement;
    if (el.dataset?.action === "submit") void submit();
    if (el.dataset?.action === "retry") requestPreview();
  });

  update(state);
  return { getState: () => state };
}
