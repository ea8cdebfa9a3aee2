// Session state: an append-only list of (question, answer) turns, one
// in-flight request at a time, and a JSON transcript that fully
// reconstructs the view.

import { AdvisorApi } from "./api.js";
import type { AdvisoryAnswer, ChunkDetail } from "./types.js";

export interface Turn {
  question: string;
  answer: AdvisoryAnswer;
}

export interface Transcript {
  scenario: string | null;
  threshold: number;
  turns: Turn[];
}

export class AdvisorSession {
  readonly api: AdvisorApi;
  readonly threshold: number;
  scenarioName: string | null = null;
  selectedChunk: ChunkDetail | null = null;
  private readonly turnList: Turn[] = [];
  private inFlight = false;

  constructor(api: AdvisorApi, threshold: number) {
    this.api = api;
    this.threshold = threshold;
  }

  get turns(): readonly Turn[] {
    return this.turnList;
  }

  get busy(): boolean {
    return this.inFlight;
  }

  async submit(question: string): Promise<Turn> {
    const trimmed = question.trim();
    if (!trimmed) throw new Error("question must be nonempty");
    if (this.inFlight) throw new Error("a request is already in flight");
    this.inFlight = true;
    try {
      const answer = await this.api.ask(trimmed);
      const turn: Turn = { question: trimmed, answer };
      this.turnList.push(turn);
      return turn;
    } finally {
      this.inFlight = false;
    }
  }

  async selectHit(chunkId: string): Promise<ChunkDetail> {
    const chunk = await this.api.chunk(chunkId);
    this.selectedChunk = chunk;
    return chunk;
  }

  exportTranscript(): Transcript {
    return {
      scenario: this.scenarioName,
      threshold: this.threshold,
      turns: this.turnList.map((turn) => ({
        question: turn.question,
        answer: { ...turn.answer },
      })),
    };
  }

  static fromTranscript(api: AdvisorApi, transcript: Transcript): AdvisorSession {
    const session = new AdvisorSession(api, transcript.threshold);
    session.scenarioName = transcript.scenario;
    for (const turn of transcript.turns) {
      session.turnList.push({ question: turn.question, answer: turn.answer });
    }
    return session;
  }
}
