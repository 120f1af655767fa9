/**
 * HTTP surface: POST /v1/classify and GET /v1/health.
 *
 * Validation errors return 400 with a message, a request for a model
 * other than the loaded one returns 409, and while the backend is
 * still loading classify answers 503. Scores are clamped to [0, 1]
 * server-side before leaving the process.
 */

import { createServer, type IncomingMessage, type Server, type ServerResponse } from "node:http";
import type { Backend, ClassifyRequest, ClassifyResponse, HealthResponse } from "./types.js";
import { MAX_BATCH } from "./types.js";

function clamp01(x: number): number {
  if (!Number.isFinite(x)) return 0;
  return Math.min(1, Math.max(0, x));
}

function send(res: ServerResponse, status: number, body: unknown): void {
  const payload = JSON.stringify(body);
  res.writeHead(status, {
    "Content-Type": "application/json",
    "Content-Length": Buffer.byteLength(payload),
  });
  res.end(payload);
}

function sendError(res: ServerResponse, status: number, message: string): void {
  send(res, status, { error: message });
}

function validate(body: unknown): ClassifyRequest | string {
  if (typeof body !== "object" || body === null) return "body must be a JSON object";
  const req = body as Partial<ClassifyRequest>;
  if (typeof req.model_id !== "string" || !req.model_id) return "model_id is required";
  if (!Array.isArray(req.items) || req.items.length === 0) {
    return "items must be a non-empty array";
  }
  if (req.items.length > MAX_BATCH) return `batch too large: max ${MAX_BATCH} items`;
  for (const item of req.items) {
    if (typeof item !== "object" || item === null) return "items must be objects";
    if (typeof item.id !== "string" || !item.id) return "every item needs an id";
    if (typeof item.headline !== "string" || !item.headline.trim()) {
      return `item ${item.id}: headline must be non-empty`;
    }
  }
  const hyp = req.hypotheses;
  if (
    typeof hyp !== "object" ||
    hyp === null ||
    typeof hyp.ascending !== "string" ||
    typeof hyp.descending !== "string" ||
    !hyp.ascending.trim() ||
    !hyp.descending.trim()
  ) {
    return "hypotheses.ascending and hypotheses.descending must be non-empty";
  }
  return req as ClassifyRequest;
}

async function readBody(req: IncomingMessage): Promise<string> {
  const chunks: Buffer[] = [];
  for await (const chunk of req) chunks.push(chunk as Buffer);
  return Buffer.concat(chunks).toString("utf-8");
}

export function createApp(backend: Backend): Server {
  return createServer(async (req, res) => {
    try {
      if (req.method === "GET" && req.url === "/v1/health") {
        const body: HealthResponse = {
          status: backend.isLoaded() ? "ok" : "loading",
          model_id: backend.modelId,
          loaded: backend.isLoaded(),
        };
        send(res, 200, body);
        return;
      }
      if (req.method === "POST" && req.url === "/v1/classify") {
        let parsed: unknown;
        try {
          parsed = JSON.parse(await readBody(req));
        } catch {
          sendError(res, 400, "invalid JSON body");
          return;
        }
        const request = validate(parsed);
        if (typeof request === "string") {
          sendError(res, 400, request);
          return;
        }
        if (request.model_id !== backend.modelId) {
          sendError(res, 409, `unknown model ${request.model_id}; serving ${backend.modelId}`);
          return;
        }
        if (!backend.isLoaded()) {
          sendError(res, 503, "model loading");
          return;
        }
        const started = process.hrtime.bigint();
        const pairs = await backend.classify(
          request.items.map((i) => i.headline),
          request.hypotheses,
        );
        const latencyMs = Number(process.hrtime.bigint() - started) / 1e6;
        const body: ClassifyResponse = {
          items: request.items.map((item, i) => ({
            id: item.id,
            up_score: clamp01(pairs[i]!.up),
            down_score: clamp01(pairs[i]!.down),
          })),
          model_id: backend.modelId,
          latency_ms: latencyMs,
        };
        send(res, 200, body);
        return;
      }
      sendError(res, 404, `no route for ${req.method} ${req.url}`);
    } catch (err) {
      sendError(res, 500, err instanceof Error ? err.message : String(err));
    }
  });
}
