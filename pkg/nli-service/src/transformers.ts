/**
 * Optional backend wrapping a pretrained zero-shot NLI model through
 * transformers.js. Each hypothesis is scored independently with the
 * standard entailment-vs-contradiction normalization (multi-label
 * mode), matching the downstream subtraction of the two scores.
 *
 * The dependency is imported dynamically: when the package or the
 * model weights are unavailable the backend simply never becomes
 * loaded and the server answers 503.
 */

import type { Backend, Hypotheses, ScorePair } from "./types.js";

type ZeroShotPipeline = (
  text: string,
  labels: string[],
  options: { multi_label: boolean },
) => Promise<{ labels: string[]; scores: number[] }>;

export class TransformersBackend implements Backend {
  readonly modelId: string;
  private pipeline: ZeroShotPipeline | null = null;
  private loading: Promise<void>;
  private failure: Error | null = null;

  constructor(modelId: string) {
    this.modelId = modelId;
    this.loading = this.load();
  }

  private async load(): Promise<void> {
    try {
      const mod: any = await import("@xenova/transformers" as string);
      this.pipeline = (await mod.pipeline(
        "zero-shot-classification",
        this.modelId,
      )) as ZeroShotPipeline;
    } catch (err) {
      this.failure = err instanceof Error ? err : new Error(String(err));
    }
  }

  async ready(): Promise<void> {
    await this.loading;
    if (this.failure) throw this.failure;
  }

  isLoaded(): boolean {
    return this.pipeline !== null;
  }

  async classify(headlines: string[], hypotheses: Hypotheses): Promise<ScorePair[]> {
    if (this.pipeline === null) {
      throw this.failure ?? new Error("model not loaded");
    }
    const labels = [hypotheses.ascending, hypotheses.descending];
    const out: ScorePair[] = [];
    for (const headline of headlines) {
      const result = await this.pipeline(headline, labels, { multi_label: true });
      const byLabel = new Map(result.labels.map((label, i) => [label, result.scores[i]!]));
      out.push({
        up: byLabel.get(hypotheses.ascending) ?? 0.0,
        down: byLabel.get(hypotheses.descending) ?? 0.0,
      });
    }
    return out;
  }
}
