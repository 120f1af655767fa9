/**
 * Deterministic lexicon backend. Mirrors the pipeline's offline stub:
 * case-insensitive whole-word phrase matching, the highest-scoring
 * matching term wins (ties by term text), no match scores neutral
 * (0.5, 0.5). The hypothesis pair selects the topic table by keyword,
 * so inflation terms never leak into growth judgments.
 */

import { readFileSync } from "node:fs";
import type { Backend, Hypotheses, ScorePair } from "./types.js";

export interface LexiconEntry {
  topic: string | null; // null rows apply to every topic
  term: string;
  up: number;
  down: number;
}

export const DEFAULT_LEXICON: LexiconEntry[] = [
  { topic: "inflation", term: "prices surge", up: 1.0, down: 0.0 },
  { topic: "inflation", term: "inflation accelerates", up: 1.0, down: 0.0 },
  { topic: "inflation", term: "cost pressures build", up: 1.0, down: 0.0 },
  { topic: "inflation", term: "record price increases", up: 1.0, down: 0.0 },
  { topic: "inflation", term: "inflation cools", up: 0.0, down: 1.0 },
  { topic: "inflation", term: "prices tumble", up: 0.0, down: 1.0 },
  { topic: "inflation", term: "disinflation takes hold", up: 0.0, down: 1.0 },
  { topic: "inflation", term: "cheaper goods ahead", up: 0.0, down: 1.0 },
  { topic: "economic_growth", term: "economy expands", up: 1.0, down: 0.0 },
  { topic: "economic_growth", term: "hiring booms", up: 1.0, down: 0.0 },
  { topic: "economic_growth", term: "output accelerates", up: 1.0, down: 0.0 },
  { topic: "economic_growth", term: "factories hum", up: 1.0, down: 0.0 },
  { topic: "economic_growth", term: "economy contracts", up: 0.0, down: 1.0 },
  { topic: "economic_growth", term: "layoffs mount", up: 0.0, down: 1.0 },
  { topic: "economic_growth", term: "recession looms", up: 0.0, down: 1.0 },
  { topic: "economic_growth", term: "demand slumps", up: 0.0, down: 1.0 },
];

export function loadLexiconCsv(path: string): LexiconEntry[] {
  const lines = readFileSync(path, "utf-8").trim().split(/\r?\n/);
  const header = lines[0];
  const hasTopic = header === "topic,term,up_score,down_score";
  if (!hasTopic && header !== "term,up_score,down_score") {
    throw new Error(`unrecognized lexicon header: ${header}`);
  }
  return lines.slice(1).map((line, i) => {
    const parts = line.split(",");
    const expect = hasTopic ? 4 : 3;
    if (parts.length !== expect) {
      throw new Error(`lexicon line ${i + 2}: expected ${expect} fields`);
    }
    const [topic, term, up, down] = hasTopic
      ? parts
      : [null, parts[0], parts[1], parts[2]];
    return { topic, term: term!, up: Number(up), down: Number(down) };
  });
}

function escapeRegExp(text: string): string {
  return text.replace(/[.*+?^${}()|[\]\\]/g, "\\$&");
}

function topicOf(hypotheses: Hypotheses): string | null {
  const text = `${hypotheses.ascending} ${hypotheses.descending}`.toLowerCase();
  if (text.includes("inflation")) return "inflation";
  if (text.includes("economic growth") || text.includes("economy")) return "economic_growth";
  return null;
}

interface CompiledEntry {
  pattern: RegExp;
  entry: LexiconEntry;
}

export class LexiconBackend implements Backend {
  readonly modelId: string;
  private readonly entries: CompiledEntry[];

  constructor(entries: LexiconEntry[] = DEFAULT_LEXICON, modelId = "lexicon-stub") {
    this.modelId = modelId;
    this.entries = entries.map((entry) => ({
      pattern: new RegExp(`(?<!\\w)${escapeRegExp(entry.term)}(?!\\w)`, "i"),
      entry,
    }));
  }

  async ready(): Promise<void> {}

  isLoaded(): boolean {
    return true;
  }

  async classify(headlines: string[], hypotheses: Hypotheses): Promise<ScorePair[]> {
    const topic = topicOf(hypotheses);
    const table = this.entries.filter(
      ({ entry }) => entry.topic === null || entry.topic === topic,
    );
    return headlines.map((headline) => {
      let best: LexiconEntry | null = null;
      for (const { pattern, entry } of table) {
        if (!pattern.test(headline)) continue;
        if (
          best === null ||
          Math.max(entry.up, entry.down) > Math.max(best.up, best.down) ||
          (Math.max(entry.up, entry.down) === Math.max(best.up, best.down) &&
            entry.term > best.term)
        ) {
          best = entry;
        }
      }
      return best === null ? { up: 0.5, down: 0.5 } : { up: best.up, down: best.down };
    });
  }
}
