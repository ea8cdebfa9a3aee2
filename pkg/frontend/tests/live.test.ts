// Live-service tests: the UI layers against two real fixture-backed
// service instances spawned by globalSetup.

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { beforeAll, describe, expect, it } from "vitest";

import { AdvisorApi, ApiError } from "../src/api.js";
import { NO_RELEVANT_DOCUMENTS_NOTICE, buildTurnView, renderTurnHtml } from "../src/render.js";
import { parseScenarios } from "../src/scenarios.js";
import { AdvisorSession } from "../src/session.js";
import type { ScenarioPreset } from "../src/types.js";
import { NORMAL_URL, PASSTHROUGH_URL } from "./globalSetup.js";

const MANUAL_EXCERPT = "利用剩余动力保持运行";

let tractionPreset: ScenarioPreset;

beforeAll(() => {
  const raw = JSON.parse(
    readFileSync(join(__dirname, "..", "public", "scenarios.json"), "utf-8"),
  );
  const load = parseScenarios(raw);
  expect(load.notice).toBeNull();
  expect(load.presets).toHaveLength(4);
  tractionPreset = load.presets.find((p) => p.id === "traction-loss-3454")!;
  expect(tractionPreset).toBeDefined();
});

describe("health", () => {
  it("both services report a populated index", async () => {
    for (const url of [NORMAL_URL, PASSTHROUGH_URL]) {
      const health = await new AdvisorApi(url).health();
      expect(health.status).toBe("ok");
      expect(health.index_size).toBeGreaterThan(0);
    }
  });
});

describe("traction-loss preset against the live service", () => {
  it("renders a grounded final answer with citation drill-down", async () => {
    const api = new AdvisorApi(NORMAL_URL);
    const health = await api.health();
    const session = new AdvisorSession(api, health.score_threshold);
    session.scenarioName = tractionPreset.id;

    const turn = await session.submit(tractionPreset.question);
    const view = buildTurnView(turn.answer, session.threshold);

    expect(turn.answer.used_retrieval).toBe(true);
    expect(view.finalText).toContain(MANUAL_EXCERPT);
    expect(view.citations.length).toBeGreaterThanOrEqual(1);
    expect(view.passthroughNotice).toBe(false);

    const html = renderTurnHtml(view);
    expect(html).toContain(MANUAL_EXCERPT);
    expect(html).toContain("citation-chip");

    // every rendered citation corresponds to a hit in the same payload
    const hitLabels = new Set(turn.answer.hits.map((h) => h.source_label));
    for (const chip of view.citations) {
      expect(hitLabels.has(chip.label)).toBe(true);
      expect(chip.chunkId).not.toBe("");
    }

    // clicking a chip fetches the cited chunk
    const first = view.citations[0]!;
    const chunk = await session.selectHit(first.chunkId);
    expect(chunk.id).toBe(first.chunkId);
    expect(chunk.source_label).toBe(first.label);
    expect(chunk.text.length).toBeGreaterThan(0);
    expect(session.selectedChunk).toEqual(chunk);
  });

  it("evidence rows show two-decimal scores with the threshold marked", async () => {
    const api = new AdvisorApi(NORMAL_URL);
    const health = await api.health();
    const session = new AdvisorSession(api, health.score_threshold);
    const turn = await session.submit(tractionPreset.question);
    const view = buildTurnView(turn.answer, session.threshold);
    expect(view.evidence.length).toBeGreaterThan(0);
    for (const row of view.evidence) {
      expect(row.scoreText).toMatch(/^-?\d+\.\d{2}$/);
    }
    expect(renderTurnHtml(view)).toContain(`threshold ${health.score_threshold.toFixed(2)}`);
  });
});

describe("passthrough state (threshold 1.01)", () => {
  it("renders the no-relevant-documents notice with zero chips", async () => {
    const api = new AdvisorApi(PASSTHROUGH_URL);
    const health = await api.health();
    expect(health.score_threshold).toBeCloseTo(1.01, 8);
    const session = new AdvisorSession(api, health.score_threshold);
    const turn = await session.submit(tractionPreset.question);
    expect(turn.answer.used_retrieval).toBe(false);
    const view = buildTurnView(turn.answer, session.threshold);
    expect(view.passthroughNotice).toBe(true);
    expect(view.citations).toHaveLength(0);
    expect(view.finalText).toBe(view.draftText);
    const html = renderTurnHtml(view);
    expect(html).toContain(NO_RELEVANT_DOCUMENTS_NOTICE);
    expect(html).not.toContain("citation-chip");
  });
});

describe("session behavior", () => {
  it("turns are append-only and transcripts reconstruct the view", async () => {
    const api = new AdvisorApi(NORMAL_URL);
    const health = await api.health();
    const session = new AdvisorSession(api, health.score_threshold);
    session.scenarioName = tractionPreset.id;
    await session.submit(tractionPreset.question);
    await session.submit("CRH380B动车组出现轴温传感器报警（故障代码5608）时，司机应如何处置？");
    expect(session.turns).toHaveLength(2);

    const transcript = session.exportTranscript();
    expect(transcript.scenario).toBe(tractionPreset.id);
    const roundTripped = JSON.parse(JSON.stringify(transcript));
    const restored = AdvisorSession.fromTranscript(api, roundTripped);
    expect(restored.turns).toHaveLength(2);
    const renderOriginal = session.turns.map((t) =>
      renderTurnHtml(buildTurnView(t.answer, session.threshold)),
    );
    const renderRestored = restored.turns.map((t) =>
      renderTurnHtml(buildTurnView(t.answer, restored.threshold)),
    );
    expect(renderRestored).toEqual(renderOriginal);
  });

  it("rejects empty questions client-side", async () => {
    const api = new AdvisorApi(NORMAL_URL);
    const session = new AdvisorSession(api, 0.12);
    await expect(session.submit("   ")).rejects.toThrow(/nonempty/);
  });

  it("allows only one in-flight request", async () => {
    const api = new AdvisorApi(NORMAL_URL);
    const session = new AdvisorSession(api, 0.12);
    const first = session.submit(tractionPreset.question);
    await expect(session.submit("第二个问题？")).rejects.toThrow(/in flight/);
    await first;
  });
});

describe("service errors", () => {
  it("empty question surfaces the structured error code", async () => {
    const api = new AdvisorApi(NORMAL_URL);
    try {
      await api.ask("   ");
      expect.unreachable("expected ApiError");
    } catch (error) {
      expect(error).toBeInstanceOf(ApiError);
      expect((error as ApiError).code).toBe("EMPTY_QUESTION");
      expect((error as ApiError).status).toBe(400);
    }
  });

  it("unknown chunk id surfaces UNKNOWN_CHUNK", async () => {
    const api = new AdvisorApi(NORMAL_URL);
    await expect(api.chunk("missing-chunk")).rejects.toMatchObject({
      code: "UNKNOWN_CHUNK",
      status: 404,
    });
  });
});
