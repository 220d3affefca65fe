import express, { Express, NextFunction, Request, Response } from "express";
import { Encoder } from "./encoder";

/**
 * The remote embedding protocol the labelshift CLI consumes:
 * POST /embed {"labels": [...]} -> {"dim": d, "vectors": {label: [...]}}.
 * 400 for anything malformed, 422 for a well-formed but empty label list.
 */
export function createApp(encoder: Encoder): Express {
  const app = express();
  app.use(express.json({ limit: "10mb" }));

  app.get("/healthz", (_req, res) => {
    res.json({ status: "ok", model: encoder.modelId });
  });

  app.post("/embed", async (req, res) => {
    const body = req.body;
    if (typeof body !== "object" || body === null || Array.isArray(body)) {
      res.status(400).json({ error: "request body must be a JSON object" });
      return;
    }
    const labels = (body as Record<string, unknown>).labels;
    if (!Array.isArray(labels) || labels.some((l) => typeof l !== "string")) {
      res.status(400).json({ error: '"labels" must be an array of strings' });
      return;
    }
    if (labels.length === 0) {
      res.status(422).json({ error: "empty label list" });
      return;
    }
    try {
      const encoded = await encoder.embed(labels as string[]);
      const vectors: Record<string, number[]> = {};
      labels.forEach((label, i) => {
        vectors[label as string] = encoded[i];
      });
      res.json({ dim: encoded[0].length, vectors });
    } catch (err) {
      res.status(500).json({ error: err instanceof Error ? err.message : String(err) });
    }
  });

  // express.json() rejects unparseable bodies via next(err); map that to 400
  app.use((err: unknown, _req: Request, res: Response, next: NextFunction) => {
    if (err instanceof SyntaxError) {
      res.status(400).json({ error: "malformed JSON body" });
      return;
    }
    next(err);
  });

  return app;
}
