// Browser bootstrap: wires the session, render models, and preset picker
// into the DOM.  All state lives in AdvisorSession; this layer only paints.

import { AdvisorApi, ApiError } from "./api.js";
import { buildTurnView, renderErrorHtml, renderTurnHtml } from "./render.js";
import { loadScenarios } from "./scenarios.js";
import { AdvisorSession } from "./session.js";

const SERVICE_URL =
  new URLSearchParams(window.location.search).get("service") ??
  "http://127.0.0.1:8763";

const api = new AdvisorApi(SERVICE_URL);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

async function start(): Promise<void> {
  const input = el<HTMLTextAreaElement>("question-input");
  const askButton = el<HTMLButtonElement>("ask-button");
  const turnsBox = el<HTMLDivElement>("turns");
  const picker = el<HTMLSelectElement>("preset-picker");
  const pickerNotice = el<HTMLDivElement>("preset-notice");
  const drillDown = el<HTMLDivElement>("chunk-panel");
  const exportButton = el<HTMLButtonElement>("export-button");
  const statusLine = el<HTMLDivElement>("status-line");

  const health = await api.health();
  statusLine.textContent =
    `index: ${health.index_size} chunks over ${health.documents} documents · ` +
    `backend: ${health.backend} · threshold: ${health.score_threshold.toFixed(2)}`;

  const session = new AdvisorSession(api, health.score_threshold);

  const scenarios = await loadScenarios("scenarios.json");
  if (scenarios.notice) {
    pickerNotice.textContent = scenarios.notice;
    picker.hidden = true;
  } else {
    for (const preset of scenarios.presets) {
      const option = document.createElement("option");
      option.value = preset.id;
      option.textContent = preset.name;
      picker.appendChild(option);
    }
    picker.addEventListener("change", () => {
      const preset = scenarios.presets.find((p) => p.id === picker.value);
      if (preset) {
        input.value = preset.question; // fill, never auto-submit
        session.scenarioName = preset.id;
      }
    });
  }

  async function showChunk(chunkId: string): Promise<void> {
    try {
      const chunk = await session.selectHit(chunkId);
      drillDown.textContent = `${chunk.source_label}\n\n${chunk.text}`;
      drillDown.hidden = false;
    } catch (error) {
      drillDown.textContent =
        error instanceof ApiError ? `${error.code}: ${error.message}` : String(error);
      drillDown.hidden = false;
    }
  }

  function appendHtml(html: string): HTMLElement {
    const wrapper = document.createElement("div");
    wrapper.innerHTML = html;
    const node = wrapper.firstElementChild as HTMLElement;
    turnsBox.appendChild(node);
    node.scrollIntoView({ block: "end" });
    return node;
  }

  async function submit(): Promise<void> {
    const question = input.value.trim();
    if (!question || session.busy) return;
    askButton.disabled = true;
    input.disabled = true;
    try {
      const turn = await session.submit(question);
      const view = buildTurnView(turn.answer, session.threshold);
      const node = appendHtml(renderTurnHtml(view));
      for (const chip of node.querySelectorAll<HTMLButtonElement>(".citation-chip")) {
        chip.addEventListener("click", () => void showChunk(chip.dataset.chunkId ?? ""));
      }
      input.value = "";
    } catch (error) {
      const message =
        error instanceof ApiError ? `${error.code}: ${error.message}` : String(error);
      const node = appendHtml(renderErrorHtml(message));
      node.querySelector<HTMLButtonElement>(".retry")?.addEventListener("click", () => {
        node.remove();
        input.value = question;
        void submit();
      });
    } finally {
      askButton.disabled = false;
      input.disabled = false;
      input.focus();
    }
  }

  askButton.addEventListener("click", () => void submit());
  input.addEventListener("keydown", (event) => {
    if (event.key === "Enter" && !event.shiftKey) {
      event.preventDefault();
      void submit();
    }
  });

  exportButton.addEventListener("click", () => {
    const blob = new Blob([JSON.stringify(session.exportTranscript(), null, 2)], {
      type: "application/json",
    });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = "advisory-transcript.json";
    link.click();
    URL.revokeObjectURL(link.href);
  });
}

void start().catch((error) => {
  const statusLine = document.getElementById("status-line");
  if (statusLine) statusLine.textContent = `service unreachable: ${String(error)}`;
});
