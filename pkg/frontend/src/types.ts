// Wire types mirroring the advisory service JSON API, field for field.

export interface RetrievalHit {
  chunk_id: string;
  score: number;
  source_label: string;
  text: string;
}

export interface AdvisoryAnswer {
  question: string;
  draft: string;
  hits: RetrievalHit[];
  used_retrieval: boolean;
  final: string;
  citations: string[];
  warnings: string[];
}

export interface ChunkDetail {
  id: string;
  document_id: string;
  source_label: string;
  category: string;
  ordinal: number;
  text: string;
  token_count: number;
}

export interface HealthInfo {
  status: string;
  index_size: number;
  documents: number;
  backend: string;
  embedder: string;
  score_threshold: number;
}

export interface ScenarioPreset {
  id: string;
  name: string;
  question: string;
}
