#!/usr/bin/env node
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { DEFAULT_MODEL, createEncoder } from "./encoder";
import { runExport } from "./export";
import { createApp } from "./server";

async function main(): Promise<void> {
  await yargs(hideBin(process.argv))
    .scriptName("embed-export")
    .command(
      "export",
      "encode a label list into a labeled TSV vector file",
      (cmd) =>
        cmd
          .option("model", { type: "string", default: DEFAULT_MODEL, describe: "model id, or hash-v1[:dim] for the offline encoder" })
          .option("labels", { type: "string", demandOption: true, describe: "input file, one label per line" })
          .option("out", { type: "string", demandOption: true, describe: "output TSV path" })
          .option("batch-size", { type: "number", default: 32, describe: "labels per model call" }),
      async (args) => {
        const result = await runExport({
          model: args.model,
          labelsPath: args.labels,
          outPath: args.out,
          batchSize: args.batchSize,
        });
        console.log(`wrote ${result.labels.length} vectors (dim ${result.dim}) to ${result.outPath}`);
      },
    )
    .command(
      "serve",
      "serve the embedding protocol over HTTP",
      (cmd) =>
        cmd
          .option("model", { type: "string", default: DEFAULT_MODEL, describe: "model id, or hash-v1[:dim] for the offline encoder" })
          .option("port", { type: "number", demandOption: true, describe: "port to bind (0 picks a free one)" }),
      async (args) => {
        const app = createApp(createEncoder(args.model));
        await new Promise<void>((resolve, reject) => {
          const server = app.listen(args.port, "127.0.0.1", () => {
            const address = server.address();
            const port = typeof address === "object" && address ? address.port : args.port;
            console.log(`listening on http://127.0.0.1:${port}`);
          });
          server.on("error", reject);
          process.on("SIGINT", () => server.close(() => resolve()));
          process.on("SIGTERM", () => server.close(() => resolve()));
        });
      },
    )
    .demandCommand(1)
    .strict()
    .fail((msg, err) => {
      console.error(err instanceof Error ? err.message : msg);
      process.exit(1);
    })
    .parseAsync();
}

main().catch((err) => {
  console.error(err instanceof Error ? err.message : String(err));
  process.exit(1);
});
