export interface ClassifyItem {
  id: string;
  headline: string;
}

export interface Hypotheses {
  ascending: string;
  descending: string;
}

export interface ClassifyRequest {
  model_id: string;
  items: ClassifyItem[];
  hypotheses: Hypotheses;
}

export interface ScoredItem {
  id: string;
  up_score: number;
  down_score: number;
}

export interface ClassifyResponse {
  items: ScoredItem[];
  model_id: string;
  latency_ms: number;
}

export interface HealthResponse {
  status: "ok" | "loading" | "error";
  model_id: string;
  loaded: boolean;
}

/** A pair of entailment scores in [0, 1] for one headline. */
export interface ScorePair {
  up: number;
  down: number;
}

export interface Backend {
  readonly modelId: string;
  /** Resolves once the backend can serve classify requests. */
  ready(): Promise<void>;
  isLoaded(): boolean;
  classify(headlines: string[], hypotheses: Hypotheses): Promise<ScorePair[]>;
}

export const MAX_BATCH = 256;
