/**
 * Extended usability survey form. Seventeen Likert items plus a review text
 * that is deliberately mandatory: the submit button stays disabled until
 * every item is answered and the review box holds something other than
 * whitespace. Server-side validation errors land inline next to the field
 * they name.
 */

import {
  ApiClient,
  ApiError,
  QuestionnaireItem,
  ServiceUnreachable,
  SurveyRecord,
  requestToken,
} from "./api.js";

export const ITEM_COUNT = 17;
export const LIKERT = [1, 2, 3, 4, 5] as const;

export interface SurveyFormState {
  respondentId: string;
  items: Array<number | null>;
  reviewText: string;
  durationMonths: number | null;
  fieldErrors: Record<string, string>;
  submitting: boolean;
  submitted: boolean;
  unreachable: boolean;
}

export function createForm(respondentId = ""): SurveyFormState {
  return {
    respondentId,
    items: Array.from({ length: ITEM_COUNT }, () => null),
    reviewText: "",
    durationMonths: null,
    fieldErrors: {},
    submitting: false,
    submitted: false,
    unreachable: false,
  };
}

export function answerItem(
  state: SurveyFormState,
  index: number,
  value: number,
): SurveyFormState {
  if (index < 0 || index >= ITEM_COUNT) {
    throw new RangeError(`item index ${index} out of range`);
  }
  if (!LIKERT.includes(value as (typeof LIKERT)[number])) {
    throw new RangeError(`likert value must be 1..5, got ${value}`);
  }
  const items = state.items.slice();
  items[index] = value;
  const fieldErrors = { ...state.fieldErrors };
  delete fieldErrors[`uq_${index + 1}`];
  return { ...state, items, fieldErrors };
}

export function setReviewText(state: SurveyFormState, text: string): SurveyFormState {
  const fieldErrors = { ...state.fieldErrors };
  delete fieldErrors["review_text"];
  return { ...state, reviewText: text, fieldErrors };
}

export function setDuration(state: SurveyFormState, months: number | null): SurveyFormState {
  const fieldErrors = { ...state.fieldErrors };
  delete fieldErrors["duration_months"];
  return { ...state, durationMonths: months, fieldErrors };
}

export function setRespondent(state: SurveyFormState, id: string): SurveyFormState {
  const fieldErrors = { ...state.fieldErrors };
  delete fieldErrors["respondent_id"];
  return { ...state, respondentId: id, fieldErrors };
}

export function allItemsAnswered(state: SurveyFormState): boolean {
  return state.items.every((v) => v !== null);
}

export function reviewPresent(state: SurveyFormState): boolean {
  return state.reviewText.trim().length > 0;
}

/** Mandatory feedback: no review text, no submission. */
export function canSubmit(state: SurveyFormState): boolean {
  return (
    allItemsAnswered(state) &&
    reviewPresent(state) &&
    state.respondentId.trim().length > 0 &&
    !state.submitting &&
    !state.submitted
  );
}

export function payload(state: SurveyFormState): SurveyRecord {
  return {
    respondent_id: state.respondentId.trim(),
    items: state.items.map((v) => v ?? 0),
    review_text: state.reviewText.trim(),
    duration_months: state.durationMonths ?? 0,
  };
}

/**
 * Map a service rejection onto field paths. Batch rejections carry detail
 * lines like "record 1: items must be ... (field uq_5)"; the trailing
 * parenthetical names the field.
 */
export function errorsByField(err: ApiError): Record<string, string> {
  const out: Record<string, string> = {};
  const lines = err.details.length > 0 ? err.details : [err.message];
  for (const line of lines) {
    const tagged = /\(field ([a-z_0-9]+)\)\s*$/.exec(line);
    const field = tagged?.[1] ?? err.field;
    const message = line.replace(/^record \d+:\s*/, "");
    if (field) {
      out[field] = message;
    } else {
      out["_form"] = message;
    }
  }
  return out;
}

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function likertRow(index: number, current: number | null): string {
  const cells = LIKERT.map((v) => {
    const checked = current === v ? " checked" : "";
    return (
      `<label class="likert-cell"><input type="radio" name="uq_${index + 1}"` +
      ` data-item="${index}" data-value="${v}"${checked}><span>${v}</span></label>`
    );
  });
  return `<div class="likert-row">${cells.join("")}</div>`;
}

export function renderForm(
  state: SurveyFormState,
  questionnaire: QuestionnaireItem[],
): string {
  if (questionnaire.length !== ITEM_COUNT) {
    throw new RangeError(
      `questionnaire must hold ${ITEM_COUNT} items, got ${questionnaire.length}`,
    );
  }
  const rows = questionnaire
    .map((item, i) => {
      const error = state.fieldErrors[`uq_${i + 1}`];
      const errorHtml = error
        ? `<p class="field-error" data-error-for="uq_${i + 1}">${esc(error)}</p>`
        : "";
      return (
        `<div class="survey-item${error ? " survey-item-error" : ""}" data-item-row="${i}">` +
        `<p class="survey-item-text"><span class="survey-item-no">${item.index}.</span> ${esc(item.text)}</p>` +
        likertRow(i, state.items[i] ?? null) +
        errorHtml +
        `</div>`
      );
    })
    .join("\n");

  const reviewError = state.fieldErrors["review_text"];
  const formError = state.fieldErrors["_form"];
  const respondentError = state.fieldErrors["respondent_id"];

  const banner = state.unreachable
    ? `<div class="banner banner-offline">Service unreachable. Your answers are kept; <button type="button" data-action="retry">retry</button></div>`
    : "";

  if (state.submitted) {
    return (
      `<div class="survey-form">` +
      `<div class="survey-done">Thank you. Your response was recorded.</div>` +
      `</div>`
    );
  }

  const disabled = canSubmit(state) ? "" : " disabled";
  const reviewNote = reviewPresent(state)
    ? ""
    : `<p class="review-required">A few words about your experience are required.</p>`;

  return (
    `<div class="survey-form">${banner}` +
    (formError ? `<p class="field-error">${esc(formError)}</p>` : "") +
    `<label class="survey-field">respondent id` +
    ` <input type="text" data-field="respondent_id" value="${esc(state.respondentId)}">` +
    (respondentError ? `<p class="field-error" data-error-for="respondent_id">${esc(respondentError)}</p>` : "") +
    `</label>` +
    `<label class="survey-field">months using the site` +
    ` <input type="number" min="0" step="0.5" data-field="duration_months"` +
    ` value="${state.durationMonths ?? ""}"></label>` +
    `<div class="survey-items">${rows}</div>` +
    `<label class="survey-field survey-review">your experience in your own words` +
    ` <textarea data-field="review_text" rows="4">${esc(state.reviewText)}</textarea>` +
    (reviewError ? `<p class="field-error" data-error-for="review_text">${esc(reviewError)}</p>` : "") +
    `</label>` +
    reviewNote +
    `<button type="button" class="survey-submit" data-action="submit"${disabled}>submit response</button>` +
    `</div>`
  );
}

export function mountForm(
  container: HTMLElement,
  client: ApiClient,
  questionnaire: QuestionnaireItem[],
  onChange?: (state: SurveyFormState) => void,
): { getState: () => SurveyFormState } {
  let state = createForm();
  const submitToken = requestToken();

  const update = (next: SurveyFormState) => {
    state = next;
    container.innerHTML = renderForm(state, questionnaire);
    onChange?.(state);
  };

  const submit = async () => {
    if (!canSubmit(state)) return;
    update({ ...state, submitting: true });
    try {
      await client.submitSurvey(payload(state), submitToken);
      update({ ...state, submitting: false, submitted: true });
    } catch (err) {
      if (err instanceof ServiceUnreachable) {
        update({ ...state, submitting: false, unreachable: true });
      } else if (err instanceof ApiError) {
        update({ ...state, submitting: false, fieldErrors: errorsByField(err) });
      } else {
        throw err;
      }
    }
  };

  container.addEventListener("change", (event) => {
    const input = event.target as HTMLInputElement;
    if (input.dataset?.item !== undefined) {
      update(answerItem(state, Number(input.dataset.item), Number(input.dataset.value)));
    } else if (input.dataset?.field === "respondent_id") {
      update(setRespondent(state, input.value));
    } else if (input.dataset?.field === "duration_months") {
      update(setDuration(state, input.value === "" ? null : Number(input.value)));
    }
  });

  // typing must not re-render the form (the caret would jump), so text
  // input only syncs state and patches the submit gate in place
  container.addEventListener("input", (event) => {
    const el = event.target as HTMLTextAreaElement;
    if (el.dataset?.field === "review_text") {
      state = setReviewText(state, el.value);
      const button = container.querySelector<HTMLButtonElement>(".survey-submit");
      if (button) button.disabled = !canSubmit(state);
      const note = container.querySelector<HTMLElement>(".review-required");
      if (note) note.style.display = reviewPresent(state) ? "none" : "";
      onChange?.(state);
    }
  });

  container.addEventListener("click", (event) => {
    const el = event.target as HTMLElement;
    if (el.dataset?.action === "submit") void submit();
  });

  update(state);
  return { getState: () => state };
}
