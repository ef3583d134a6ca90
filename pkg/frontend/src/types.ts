/** Wire types for the human evaluation HTTP API. */

export interface CandidateView {
  candidate_id: string;
  text: string;
}

export interface SampleView {
  sample_id: string;
  context: string;
  reference_title: string;
  reference_abstract: string;
  candidates: CandidateView[];
}

export interface Progress {
  completed: number;
  total: number;
}

export interface NextResponse {
  done: boolean;
  progress: Progress;
  sample?: SampleView;
  dimensions?: string[];
}

export interface JudgmentBody {
  judge_id: string;
  sample_id: string;
  dimension: string;
  /** Tiers, best first; candidates sharing a tier are tied. */
  ranking: string[][];
  client_token: string;
}

export interface SubmitResponse {
  accepted: boolean;
  seq: number;
}

export const DIMENSIONS = ["fluency", "relevance", "coherence", "overall"] as const;
export type Dimension = (typeof DIMENSIONS)[number];

/** Tier per candidate id (1 = best); equal tiers mean indistinguishable. */
export type DraftRanking = Record<string, number>;
