/**
 * Training and evaluation loop.
 *
 * Optimizer is Adam; the loss is softmax cross-entropy over the
 * classifier logits. Batches are drawn in a seeded shuffled order each
 * epoch, so a run is reproducible for a given (document, seed) pair.
 * Evaluation runs in inference mode (running BN moments) and reports
 * the top-1 error percentage on the held-out split.
 */
import * as tf from "@tensorflow/tfjs";

import type { Dataset } from "./data.js";
import { NetworkModel } from "./model.js";

export class TrainError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "TrainError";
  }
}

export interface TrainConfig {
  epochs: number;
  batchSize: number;
  learningRate: number;
  seed: number;
}

export const DEFAULT_TRAIN_CONFIG: TrainConfig = {
  epochs: 100,
  batchSize: 128,
  learningRate: 0.001,
  seed: 0,
};

export interface RunReport {
  model: string;
  scheme: string;
  /** Trainable weight elements, recorded before any update. */
  paramCount: number;
  epochsTrained: number;
  finalTrainLoss: number | null;
  finalTestErrorPct: number;
  meanBatchLatencyMs: number | null;
  seed: number;
  weightInit: "he-normal";
}

export interface EpochStats {
  epoch: number;
  meanLoss: number;
  batches: number;
}

export interface TrainOptions {
  /** Called after each epoch with that epoch's stats. */
  onEpoch?: (stats: EpochStats) => void;
}

function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function shuffledIndices(n: number, rand: () => number): Int32Array {
  const order = new Int32Array(n);
  for (let i = 0; i < n; i += 1) order[i] = i;
  for (let i = n - 1; i > 0; i -= 1) {
    const j = Math.floor(rand() * (i + 1));
    const tmp = order[i]!;
    order[i] = order[j]!;
    order[j] = tmp;
  }
  return order;
}

function gatherBatch(
  images: Float32Array,
  labels: Int32Array,
  order: Int32Array,
  start: number,
  count: number,
  pixels: number,
): { x: Float32Array; y: Int32Array } {
  const x = new Float32Array(count * pixels);
  const y = new Int32Array(count);
  for (let i = 0; i < count; i += 1) {
    const src = order[start + i]!;
    x.set(images.subarray(src * pixels, (src + 1) * pixels), i * pixels);
    y[i] = labels[src]!;
  }
  return { x, y };
}

/** Top-1 error percentage over the test split, in inference mode. */
export function evaluate(
  model: NetworkModel,
  dataset: Dataset,
  batchSize = 256,
): number {
  const { testImages, testLabels, height, width, channels } = dataset;
  const pixels = height * width * channels;
  const count = testLabels.length;
  if (count === 0) throw new TrainError("test split is empty");

  let wrong = 0;
  for (let start = 0; start < count; start += batchSize) {
    const n = Math.min(batchSize, count - start);
    const predictions = tf.tidy(() => {
      const x = tf.tensor4d(
        testImages.subarray(start * pixels, (start + n) * pixels),
        [n, height, width, channels],
      );
      return model.predict(x).argMax(-1);
    });
    const picked = predictions.dataSync();
    predictions.dispose();
    for (let i = 0; i < n; i += 1) {
      if (picked[i] !== testLabels[start + i]) wrong += 1;
    }
  }
  return (100 * wrong) / count;
}

/**
 * Train `model` on the dataset's train split, then evaluate on its
 * test split. Returns the run report; `paramCount` is measured before
 * the first update.
 */
export function trainEval(
  model: NetworkModel,
  dataset: Dataset,
  config: TrainConfig = DEFAULT_TRAIN_CONFIG,
  options: TrainOptions = {},
): RunReport {
  const { epochs, batchSize, learningRate, seed } = config;
  if (epochs < 0) throw new TrainError(`epochs must be >= 0, got ${epochs}`);
  if (batchSize < 1) {
    throw new TrainError(`batch size must be >= 1, got ${batchSize}`);
  }
  if (!(learningRate > 0)) {
    throw new TrainError(`learning rate must be > 0, got ${learningRate}`);
  }
  const { trainImages, trainLabels, height, width, channels, numClasses } =
    dataset;
  if (channels !== model.document.model.input_shape[0]) {
    throw new TrainError(
      `dataset has ${channels} channels but the model expects ` +
        `${model.document.model.input_shape[0]}`,
    );
  }
  const pixels = height * width * channels;
  const trainCount = trainLabels.length;
  if (epochs > 0 && trainCount === 0) {
    throw new TrainError("train split is empty");
  }

  const paramCount = model.trainableParamCount();
  const optimizer = tf.train.adam(learningRate);
  const variables = model.trainableVariables();
  const rand = mulberry32(seed);

  let finalTrainLoss: number | null = null;
  let batchCount = 0;
  let latencyTotalMs = 0;

  for (let epoch = 0; epoch < epochs; epoch += 1) {
    const order = shuffledIndices(trainCount, rand);
    let lossSum = 0;
    let epochBatches = 0;
    for (let start = 0; start < trainCount; start += batchSize) {
      const n = Math.min(batchSize, trainCount - start);
      const batch = gatherBatch(trainImages, trainLabels, order, start, n, pixels);
      const began = performance.now();
      const lossTensor = optimizer.minimize(
        () =>
          tf.tidy(() => {
            const x = tf.tensor4d(batch.x, [n, height, width, channels]);
            const y = tf.oneHot(tf.tensor1d(batch.y, "int32"), numClasses);
            const { logits } = model.forward(x, { training: true });
            return tf.losses.softmaxCrossEntropy(y, logits) as tf.Scalar;
          }),
        true,
        variables,
      );
      latencyTotalMs += performance.now() - began;
      const loss = lossTensor!.dataSync()[0]!;
      lossTensor!.dispose();
      if (!Number.isFinite(loss)) {
        optimizer.dispose();
        throw new TrainError(
          `loss diverged to ${loss} at epoch ${epoch + 1}, batch ${epochBatches + 1}`,
        );
      }
      lossSum += loss;
      epochBatches += 1;
      batchCount += 1;
    }
    finalTrainLoss = lossSum / epochBatches;
    options.onEpoch?.({ epoch: epoch + 1, meanLoss: finalTrainLoss, batches: epochBatches });
  }
  optimizer.dispose();

  return {
    model: model.document.model.name,
    scheme: model.document.model.scheme,
    paramCount,
    epochsTrained: epochs,
    finalTrainLoss,
    finalTestErrorPct: evaluate(model, dataset),
    meanBatchLatencyMs: batchCount > 0 ? latencyTotalMs / batchCount : null,
    seed,
    weightInit: "he-normal",
  };
}
