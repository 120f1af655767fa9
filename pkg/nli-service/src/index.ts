/**
 * Entry point. MODEL_ID selects the backend: the default
 * "lexicon-stub" serves the deterministic term table (optionally from
 * LEXICON_PATH), anything containing a slash is treated as a
 * pretrained zero-shot model id for transformers.js. PORT defaults to
 * 8750.
 */

import { LexiconBackend, loadLexiconCsv } from "./lexicon.js";
import { createApp } from "./server.js";
import { TransformersBackend } from "./transformers.js";
import type { Backend } from "./types.js";

export function backendFromEnv(env: NodeJS.ProcessEnv = process.env): Backend {
  const modelId = env.MODEL_ID ?? "lexicon-stub";
  if (modelId.includes("/")) {
    return new TransformersBackend(modelId);
  }
  const entries = env.LEXICON_PATH ? loadLexiconCsv(env.LEXICON_PATH) : undefined;
  return new LexiconBackend(entries, modelId);
}

function main(): void {
  const backend = backendFromEnv();
  const port = Number(process.env.PORT ?? 8750);
  const server = createApp(backend);
  server.listen(port, () => {
    console.log(`nli-service serving ${backend.modelId} on :${port}`);
  });
  backend
    .ready()
    .then(() => console.log(`model ${backend.modelId} loaded`))
    .catch((err) => console.error(`model load failed: ${err.message}`));
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (invokedDirectly) {
  main();
}
