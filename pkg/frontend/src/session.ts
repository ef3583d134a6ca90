/**
 * Judge session state: the current sample, per-dimension draft rankings,
 * and submission with idempotent retry.
 *
 * The server is the source of truth; drafts live only until their four
 * judgments are accepted, then the session advances to the next sample.
 * Failed submissions stay queued and are retried with the same client
 * token, so retries and double-clicks never create duplicates.
 */

import { ApiClient } from "./api.js";
import {
  DIMENSIONS,
  type Dimension,
  type DraftRanking,
  type JudgmentBody,
  type Progress,
  type SampleView,
} from "./types.js";

/** Stable token so the server can deduplicate retries of one judgment. */
export function clientToken(
  judgeId: string,
  sampleId: string,
  dimension: string,
  ranking: string[][],
): string {
  const payload = `${judgeId}|${sampleId}|${dimension}|${JSON.stringify(ranking)}`;
  // djb2: tiny, dependency-free, and stable across sessions.
  let hash = 5381;
  for (let i = 0; i < payload.length; i++) {
    hash = ((hash << 5) + hash + payload.charCodeAt(i)) >>> 0;
  }
  return `${judgeId}:${sampleId}:${dimension}:${hash.toString(16)}`;
}

/** Group a tier map into ranking tiers, best (lowest tier number) first. */
export function tiersToRanking(draft: DraftRanking): string[][] {
  const byTier = new Map<number, string[]>();
  for (const [candidateId, tier] of Object.entries(draft)) {
    const bucket = byTier.get(tier) ?? [];
    bucket.push(candidateId);
    byTier.set(tier, bucket);
  }
  return [...byTier.entries()]
    .sort((a, b) => a[0] - b[0])
    .map(([, ids]) => ids.sort());
}

export type SessionPhase = "loading" | "judging" | "submitting" | "done" | "error";

export class JudgeSession {
  phase: SessionPhase = "loading";
  sample: SampleView | null = null;
  progress: Progress = { completed: 0, total: 0 };
  drafts: Partial<Record<Dimension, DraftRanking>> = {};
  lastError: string | null = null;
  /** Judgments accepted by the server but not yet advanced past. */
  private pending: JudgmentBody[] = [];
  private submitting = false;

  constructor(
    private api: ApiClient,
    readonly runId: string,
    readonly judgeId: string,
  ) {}

  async loadNext(): Promise<void> {
    this.phase = "loading";
    const next = await this.api.nextSample(this.runId, this.judgeId);
    this.progress = next.progress;
    if (next.done) {
      this.phase = "done";
      this.sample = null;
      return;
    }
    this.sample = next.sample ?? null;
    this.drafts = {};
    this.phase = "judging";
  }

  /** Assign a tier (1 = best) to a candidate for one dimension. */
  setTier(dimension: Dimension, candidateId: string, tier: number): void {
    const draft = this.drafts[dimension] ?? {};
    draft[candidateId] = tier;
    this.drafts[dimension] = draft;
  }

  /** Mark every candidate indistinguishable for one dimension. */
  tieAll(dimension: Dimension): void {
    if (!this.sample) return;
    const draft: DraftRanking = {};
    for (const candidate of this.sample.candidates) {
      draft[candidate.candidate_id] = 1;
    }
    this.drafts[dimension] = draft;
  }

  isDimensionComplete(dimension: Dimension): boolean {
    if (!this.sample) return false;
    const draft = this.drafts[dimension];
    if (!draft) return false;
    return this.sample.candidates.every((c) => draft[c.candidate_id] !== undefined);
  }

  canSubmit(): boolean {
    return (
      this.phase === "judging" && DIMENSIONS.every((d) => this.isDimensionComplete(d))
    );
  }

  /**
   * Submit all four dimension judgments, then advance to the next sample.
   * Concurrent calls (double-click) collapse into one logical submission;
   * network failures keep the queue and surface a retry affordance.
   */
  async submit(): Promise<void> {
    if (this.submitting || !this.sample) return;
    if (!this.canSubmit() && this.pending.length === 0) return;
    this.submitting = true;
    this.phase = "submitting";
    try {
      if (this.pending.length === 0) {
        const sampleId = this.sample.sample_id;
        this.pending = DIMENSIONS.map((dimension) => {
          const ranking = tiersToRanking(this.drafts[dimension]!);
          return {
            judge_id: this.judgeId,
            sample_id: sampleId,
            dimension,
            ranking,
            client_token: clientToken(this.judgeId, sampleId, dimension, ranking),
          };
        });
      }
      while (this.pending.length > 0) {
        await this.api.submitJudgment(this.runId, this.pending[0]!);
        this.pending.shift();
      }
      this.lastError = null;
      await this.loadNext();
    } catch (error) {
      // Drafts and the unsent queue survive; submit() retries them.
      this.phase = "error";
      this.lastError = error instanceof Error ? error.message : String(error);
    } finally {
      this.submitting = false;
    }
  }

  /** Retry after a failed submission without losing drafts. */
  async retry(): Promise<void> {
    if (this.phase !== "error") return;
    this.phase = "judging";
    await this.submit();
  }
}
