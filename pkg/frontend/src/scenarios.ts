// Scenario presets: bundled JSON, parsed defensively.  Selecting a preset
// fills the input but never auto-submits; the human decides.

import type { ScenarioPreset } from "./types.js";

export interface ScenarioLoad {
  presets: ScenarioPreset[];
  notice: string | null;
}

export function parseScenarios(raw: unknown): ScenarioLoad {
  if (!Array.isArray(raw)) {
    return { presets: [], notice: "Scenario preset file is missing or malformed." };
  }
  const presets: ScenarioPreset[] = [];
  for (const entry of raw) {
    if (
      entry &&
      typeof entry.id === "string" &&
      typeof entry.name === "string" &&
      typeof entry.question === "string" &&
      entry.question.length > 0
    ) {
      presets.push({ id: entry.id, name: entry.name, question: entry.question });
    }
  }
  if (presets.length === 0) {
    return { presets: [], notice: "No scenario presets available." };
  }
  return { presets, notice: null };
}

export async function loadScenarios(url: string): Promise<ScenarioLoad> {
  try {
    const response = await fetch(url);
    if (!response.ok) {
      return { presets: [], notice: "No scenario presets available." };
    }
    return parseScenarios(await response.json());
  } catch {
    return { presets: [], notice: "No scenario presets available." };
  }
}
