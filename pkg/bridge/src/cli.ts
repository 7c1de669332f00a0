#!/usr/bin/env node
/**
 * Command-line front end.
 *
 * Exit codes: 0 success, 1 synthetic generation finished with reported
 * failures, 2 contract or usage error.
 */
import { readFileSync } from "node:fs";

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { formatError } from "./errors.js";
import { fineTune } from "./fineTune.js";
import { predict } from "./predict.js";
import { TemplateEndpoint, generateSynthetic } from "./synthetic.js";

export async function main(argv: readonly string[]): Promise<number> {
  let exitCode = 0;
  const parser = yargs(argv as string[])
    .scriptName("trdsent-bridge")
    .strict()
    .exitProcess(false)
    .fail((msg, err) => {
      if (err) throw err;
      throw new Error(msg);
    })
    .command(
      "fine-tune",
      "Train a window sentiment classifier from a windows+labels file",
      (y) =>
        y
          .option("train", { type: "string", demandOption: true, describe: "train JSONL" })
          .option("validation", {
            type: "string",
            demandOption: true,
            describe: "held-out JSONL for early stopping",
          })
          .option("out-dir", { type: "string", demandOption: true })
          .option("config", { type: "string", describe: "training config JSON" }),
      (args) => {
        const config = args.config
          ? (JSON.parse(readFileSync(args.config, "utf-8")) as unknown)
          : undefined;
        const result = fineTune({
          trainFile: args.train,
          validationFile: args.validation,
          outDir: args.outDir,
          config,
        });
        const m = result.metadata;
        console.log(
          `trained on ${m.counts.train.total} instances ` +
            `(best epoch ${m.bestEpoch}/${m.epochs.length}, data order ${m.dataOrderHash})`,
        );
      },
    )
    .command(
      "predict",
      "Label masked windows with a trained checkpoint",
      (y) =>
        y
          .option("checkpoint", { type: "string", demandOption: true })
          .option("windows", { type: "string", demandOption: true })
          .option("out", { type: "string", demandOption: true }),
      (args) => {
        const result = predict({
          checkpointFile: args.checkpoint,
          windowsFile: args.windows,
          outFile: args.out,
        });
        console.log(`wrote ${result.written} predictions`);
      },
    )
    .command(
      "generate-synthetic",
      "Expand augmentation prompts into synthetic train instances",
      (y) =>
        y
          .option("instances", {
            type: "string",
            demandOption: true,
            describe: "original windows+labels JSONL",
          })
          .option("prompts", { type: "string", demandOption: true })
          .option("out", { type: "string", demandOption: true })
          .option("audit", { type: "string", demandOption: true })
          .option("k", { type: "number", default: 5 })
          .option("max-attempts", { type: "number", default: 3 }),
      async (args) => {
        const audit = await generateSynthetic({
          instancesFile: args.instances,
          promptsFile: args.prompts,
          outFile: args.out,
          auditFile: args.audit,
          endpoint: new TemplateEndpoint(),
          k: args.k,
          maxAttempts: args.maxAttempts,
        });
        console.log(
          `wrote ${audit.written.total} synthetic instances ` +
            `(${audit.retried.length} retried, ${audit.failed.length} failed)`,
        );
        if (audit.failed.length > 0) {
          for (const f of audit.failed) {
            console.error(`failed after ${f.attempts} attempts: ${f.mention_id}: ${f.reason}`);
          }
          exitCode = 1;
        }
      },
    )
    .demandCommand(1)
    .version("0.1.0")
    .help();

  try {
    await parser.parseAsync();
    return exitCode;
  } catch (err) {
    console.error(formatError(err));
    return 2;
  }
}

const isDirectRun =
  process.argv[1] !== undefined && import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (isDirectRun) {
  main(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
