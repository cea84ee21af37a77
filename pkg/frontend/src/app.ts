/**
 * Console shell: three tabs over one project service. The service base URL
 * comes from the page query (?service=http://host:port), default same
 * origin, so the built bundle can be served from anywhere.
 */

import { ApiClient } from "./api.js";
import { mountWizard } from "./pairwise.js";
import { mountForm } from "./susForm.js";
import { mountReports } from "./reports.js";

type TabName = "survey" | "experts" | "reports";

function serviceBase(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("service") ?? "";
}

export async function start(root: HTMLElement): Promise<void> {
  const client = new ApiClient(serviceBase());

  root.innerHTML = `
    <header class="console-header">
      <h1>wuiq console</h1>
      <nav class="tabs">
        <button type="button" data-tab="survey" class="tab tab-active">survey</button>
        <button type="button" data-tab="experts" class="tab">expert panel</button>
        <button type="button" data-tab="reports" class="tab">reports</button>
      </nav>
    </header>
    <main>
      <section data-panel="survey" class="tab-panel"></section>
      <section data-panel="experts" class="tab-panel" hidden></section>
      <section data-panel="reports" class="tab-panel" hidden></section>
    </main>`;

  const panel = (name: TabName) =>
    root.querySelector<HTMLElement>(`[data-panel="${name}"]`)!;

  let project;
  try {
    project = await client.project();
  } catch {
    root.querySelector("main")!.innerHTML =
      `<div class="empty-state">Cannot reach the project service.` +
      ` Start it with <code>wuiq serve</code> and reload` +
      ` (or point this page at it with ?service=http://host:port).</div>`;
    return;
  }

  const questionnaire = (await client.questionnaire()).items;
  mountForm(panel("survey"), client, questionnaire);

  const expertsPanel = panel("experts");
  expertsPanel.innerHTML = `
    <form class="expert-who">
      <label>expert id <input type="text" data-field="expert_id" required></label>
      <label>role <input type="text" data-field="role" required></label>
      <button type="submit">start comparison</button>
    </form>
    <div class="wizard-slot"></div>`;
  expertsPanel.querySelector("form")!.addEventListener("submit", (event) => {
    event.preventDefault();
    const expertId = expertsPanel
      .querySelector<HTMLInputElement>('[data-field="expert_id"]')!
      .value.trim();
    const role = expertsPanel
      .querySelector<HTMLInputElement>('[data-field="role"]')!
      .value.trim();
    if (!expertId) return;
    mountWizard(
      expertsPanel.querySelector<HTMLElement>(".wizard-slot")!,
      client,
      project.criteria,
      { expertId, role },
    );
  });

  let reportsLoaded = false;
  root.querySelector(".tabs")!.addEventListener("click", (event) => {
    const button = event.target as HTMLElement;
    const tab = button.dataset?.tab as TabName | undefined;
    if (!tab) return;
    root.querySelectorAll<HTMLElement>(".tab").forEach((b) => {
      b.classList.toggle("tab-active", b === button);
    });
    (["survey", "experts", "reports"] as TabName[]).forEach((name) => {
      panel(name).hidden = name !== tab;
    });
    if (tab === "reports" && !reportsLoaded) {
      reportsLoaded = true;
      void mountReports(panel("reports"), client);
    }
  });
}
