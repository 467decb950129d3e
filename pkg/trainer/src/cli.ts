/**
 * Command-line trainer.
 *
 *   trainer train --graph model.json --dataset synthetic --epochs 2
 *
 * Exit codes: 0 success, 1 data or training failure, 2 usage error.
 */
import { writeFileSync } from "node:fs";
import { parseArgs } from "node:util";

import { loadDocument, DocumentError } from "./document.js";
import { DataError, loadDataset, type DatasetName } from "./data.js";
import { NetworkModel } from "./model.js";
import {
  DEFAULT_TRAIN_CONFIG,
  TrainError,
  trainEval,
  type RunReport,
} from "./train.js";

const USAGE = `usage: trainer train --graph <document.json> --dataset <cifar10|svhn|synthetic>
                     [--data-dir <dir>] [--epochs <n>] [--batch-size <n>]
                     [--learning-rate <x>] [--seed <n>] [--bn-momentum <x>]
                     [--limit-train <n>] [--limit-test <n>] [--out <report.json>]`;

class UsageError extends Error {}

function parsePositiveInt(value: string, flag: string): number {
  const parsed = Number(value);
  if (!Number.isInteger(parsed) || parsed < 1) {
    throw new UsageError(`${flag} expects a positive integer, got ${value}`);
  }
  return parsed;
}

function parseNonNegativeInt(value: string, flag: string): number {
  const parsed = Number(value);
  if (!Number.isInteger(parsed) || parsed < 0) {
    throw new UsageError(`${flag} expects a non-negative integer, got ${value}`);
  }
  return parsed;
}

interface TrainArgs {
  graph: string;
  dataset: DatasetName;
  dataDir?: string;
  epochs: number;
  batchSize: number;
  learningRate: number;
  seed: number;
  bnMomentum?: number;
  limitTrain?: number;
  limitTest?: number;
  out?: string;
}

function parseTrainArgs(argv: string[]): TrainArgs {
  let values: ReturnType<typeof parseArgs>["values"];
  try {
    ({ values } = parseArgs({
      args: argv,
      options: {
        graph: { type: "string" },
        dataset: { type: "string" },
        "data-dir": { type: "string" },
        epochs: { type: "string" },
        "batch-size": { type: "string" },
        "learning-rate": { type: "string" },
        seed: { type: "string" },
        "bn-momentum": { type: "string" },
        "limit-train": { type: "string" },
        "limit-test": { type: "string" },
        out: { type: "string" },
      },
      allowPositionals: false,
    }));
  } catch (err) {
    throw new UsageError((err as Error).message);
  }

  const graph = values.graph as string | undefined;
  if (!graph) throw new UsageError("--graph is required");
  const dataset = values.dataset as string | undefined;
  if (!dataset) throw new UsageError("--dataset is required");
  if (dataset !== "cifar10" && dataset !== "svhn" && dataset !== "synthetic") {
    throw new UsageError(
      `unknown dataset ${dataset}; choose cifar10, svhn, or synthetic`,
    );
  }

  const learningRate =
    values["learning-rate"] !== undefined
      ? Number(values["learning-rate"])
      : DEFAULT_TRAIN_CONFIG.learningRate;
  if (!(learningRate > 0)) {
    throw new UsageError(
      `--learning-rate expects a positive number, got ${values["learning-rate"]}`,
    );
  }

  let bnMomentum: number | undefined;
  if (values["bn-momentum"] !== undefined) {
    bnMomentum = Number(values["bn-momentum"]);
    if (!(bnMomentum > 0 && bnMomentum < 1)) {
      throw new UsageError(
        `--bn-momentum expects a number in (0, 1), got ${values["bn-momentum"]}`,
      );
    }
  }

  return {
    graph,
    dataset,
    dataDir: values["data-dir"] as string | undefined,
    epochs:
      values.epochs !== undefined
        ? parseNonNegativeInt(values.epochs as string, "--epochs")
        : DEFAULT_TRAIN_CONFIG.epochs,
    batchSize:
      values["batch-size"] !== undefined
        ? parsePositiveInt(values["batch-size"] as string, "--batch-size")
        : DEFAULT_TRAIN_CONFIG.batchSize,
    learningRate,
    seed:
      values.seed !== undefined
        ? parseNonNegativeInt(values.seed as string, "--seed")
        : DEFAULT_TRAIN_CONFIG.seed,
    bnMomentum,
    limitTrain:
      values["limit-train"] !== undefined
        ? parsePositiveInt(values["limit-train"] as string, "--limit-train")
        : undefined,
    limitTest:
      values["limit-test"] !== undefined
        ? parsePositiveInt(values["limit-test"] as string, "--limit-test")
        : undefined,
    out: values.out as string | undefined,
  };
}

function runTrain(args: TrainArgs): RunReport {
  const document = loadDocument(args.graph);
  const dataset = loadDataset(args.dataset, args.dataDir, {
    limitTrain: args.limitTrain,
    limitTest: args.limitTest,
  });
  const model = new NetworkModel(
    document,
    args.seed,
    args.bnMomentum !== undefined ? { bnMomentum: args.bnMomentum } : {},
  );
  try {
    return trainEval(
      model,
      dataset,
      {
        epochs: args.epochs,
        batchSize: args.batchSize,
        learningRate: args.learningRate,
        seed: args.seed,
      },
      {
        onEpoch: (stats) => {
          process.stderr.write(
            `epoch ${stats.epoch}/${args.epochs}: mean loss ${stats.meanLoss.toFixed(4)}\n`,
          );
        },
      },
    );
  } finally {
    model.dispose();
  }
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    if (command === undefined || command === "--help" || command === "-h") {
      process.stderr.write(USAGE + "\n");
      return command === undefined ? 2 : 0;
    }
    if (command !== "train") {
      throw new UsageError(`unknown command ${command}`);
    }
    const args = parseTrainArgs(rest);
    const report = runTrain(args);
    const rendered = JSON.stringify(report, null, 2) + "\n";
    if (args.out) {
      writeFileSync(args.out, rendered);
    }
    process.stdout.write(rendered);
    return 0;
  } catch (err) {
    if (err instanceof UsageError) {
      process.stderr.write(`error: ${err.message}\n${USAGE}\n`);
      return 2;
    }
    if (
      err instanceof DocumentError ||
      err instanceof DataError ||
      err instanceof TrainError
    ) {
      process.stderr.write(`error: ${err.message}\n`);
      return 1;
    }
    throw err;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  process.exitCode = main(process.argv.slice(2));
}
