/**
 * Dataset loading.
 *
 * CIFAR-10 is read from its binary batch files: each record is 3073
 * bytes, one label byte followed by 3072 pixel bytes stored planar
 * (1024 red, then green, then blue, row-major within each plane).
 * Records convert to NHWC float32 in [0, 1].
 *
 * SVHN is accepted in the same converted record layout (label byte
 * plus three planar 32x32 channel planes per record) under files named
 * `train.bin` / `test.bin`; convert the original cropped-digit .mat
 * files to that layout offline.
 *
 * The synthetic dataset needs no files: a seeded generator draws
 * class-conditioned images (per-class channel bias plus a class-indexed
 * bright stripe over noise), so smoke tests and dry runs are
 * deterministic and learnable without any download.
 */
import { existsSync, readFileSync } from "node:fs";
import { join } from "node:path";

export class DataError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "DataError";
  }
}

export interface Dataset {
  /** NHWC float32 pixels in [0, 1], length n*h*w*c. */
  trainImages: Float32Array;
  trainLabels: Int32Array;
  testImages: Float32Array;
  testLabels: Int32Array;
  height: number;
  width: number;
  channels: number;
  numClasses: number;
}

export interface LoadOptions {
  /** Keep only the first n training records. */
  limitTrain?: number;
  /** Keep only the first n test records. */
  limitTest?: number;
}

const CIFAR_SIDE = 32;
const CIFAR_CHANNELS = 3;
const CIFAR_PLANE = CIFAR_SIDE * CIFAR_SIDE;
const CIFAR_RECORD = 1 + CIFAR_CHANNELS * CIFAR_PLANE;
const CIFAR_CLASSES = 10;

const CIFAR_TRAIN_FILES = [
  "data_batch_1.bin",
  "data_batch_2.bin",
  "data_batch_3.bin",
  "data_batch_4.bin",
  "data_batch_5.bin",
];
const CIFAR_TEST_FILES = ["test_batch.bin"];

interface RecordBatch {
  images: Float32Array;
  labels: Int32Array;
}

function decodeRecords(buffers: Buffer[], limit?: number): RecordBatch {
  let total = 0;
  for (const buf of buffers) {
    if (buf.length % CIFAR_RECORD !== 0) {
      throw new DataError(
        `batch file size ${buf.length} is not a multiple of the ${CIFAR_RECORD}-byte record`,
      );
    }
    total += buf.length / CIFAR_RECORD;
  }
  const count = limit !== undefined ? Math.min(limit, total) : total;
  const images = new Float32Array(count * CIFAR_CHANNELS * CIFAR_PLANE);
  const labels = new Int32Array(count);

  let index = 0;
  for (const buf of buffers) {
    const records = buf.length / CIFAR_RECORD;
    for (let r = 0; r < records && index < count; r += 1, index += 1) {
      const base = r * CIFAR_RECORD;
      const label = buf[base]!;
      if (label >= CIFAR_CLASSES) {
        throw new DataError(`record ${index} has label ${label}, expected 0..9`);
      }
      labels[index] = label;
      // planar bytes -> interleaved NHWC floats
      const imageBase = index * CIFAR_PLANE * CIFAR_CHANNELS;
      for (let p = 0; p < CIFAR_PLANE; p += 1) {
        for (let ch = 0; ch < CIFAR_CHANNELS; ch += 1) {
          images[imageBase + p * CIFAR_CHANNELS + ch] =
            buf[base + 1 + ch * CIFAR_PLANE + p]! / 255;
        }
      }
    }
  }
  return { images, labels };
}

function readBatches(dir: string, names: string[]): Buffer[] {
  return names.map((name) => {
    const path = join(dir, name);
    if (!existsSync(path)) {
      throw new DataError(`missing dataset file: ${path}`);
    }
    try {
      return readFileSync(path);
    } catch (err) {
      throw new DataError(`cannot read ${path}: ${(err as Error).message}`);
    }
  });
}

function loadBinaryPair(
  dir: string,
  trainFiles: string[],
  testFiles: string[],
  options: LoadOptions,
): Dataset {
  const train = decodeRecords(readBatches(dir, trainFiles), options.limitTrain);
  const test = decodeRecords(readBatches(dir, testFiles), options.limitTest);
  return {
    trainImages: train.images,
    trainLabels: train.labels,
    testImages: test.images,
    testLabels: test.labels,
    height: CIFAR_SIDE,
    width: CIFAR_SIDE,
    channels: CIFAR_CHANNELS,
    numClasses: CIFAR_CLASSES,
  };
}

export function loadCifar10(dir: string, options: LoadOptions = {}): Dataset {
  return loadBinaryPair(dir, CIFAR_TRAIN_FILES, CIFAR_TEST_FILES, options);
}

export function loadSvhn(dir: string, options: LoadOptions = {}): Dataset {
  return loadBinaryPair(dir, ["train.bin"], ["test.bin"], options);
}

// ── synthetic dataset ───────────────────────────────────────────────────────

/** Deterministic 32-bit PRNG; good enough for fixture data. */
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

export interface SyntheticOptions {
  trainCount?: number;
  testCount?: number;
  height?: number;
  width?: number;
  channels?: number;
  numClasses?: number;
  seed?: number;
}

function fillSynthetic(
  images: Float32Array,
  labels: Int32Array,
  h: number,
  w: number,
  c: number,
  classes: number,
  rand: () => number,
): void {
  const pixels = h * w * c;
  for (let i = 0; i < labels.length; i += 1) {
    const label = Math.floor(rand() * classes);
    labels[i] = label;
    const base = i * pixels;
    const bias = (label + 1) / (classes + 1);
    const stripe = label % h;
    for (let y = 0; y < h; y += 1) {
      for (let x = 0; x < w; x += 1) {
        for (let ch = 0; ch < c; ch += 1) {
          let v = 0.15 * rand() + bias * ((ch + 1) / c) * 0.6;
          if (y === stripe) v += 0.5;
          images[base + (y * w + x) * c + ch] = Math.min(1, v);
        }
      }
    }
  }
}

/** Class-conditioned random images; same seed, same bytes. */
export function syntheticDataset(options: SyntheticOptions = {}): Dataset {
  const {
    trainCount = 512,
    testCount = 256,
    height = 32,
    width = 32,
    channels = 3,
    numClasses = 10,
    seed = 7,
  } = options;
  const rand = mulberry32(seed);
  const trainImages = new Float32Array(trainCount * height * width * channels);
  const trainLabels = new Int32Array(trainCount);
  const testImages = new Float32Array(testCount * height * width * channels);
  const testLabels = new Int32Array(testCount);
  fillSynthetic(trainImages, trainLabels, height, width, channels, numClasses, rand);
  fillSynthetic(testImages, testLabels, height, width, channels, numClasses, rand);
  return {
    trainImages,
    trainLabels,
    testImages,
    testLabels,
    height,
    width,
    channels,
    numClasses,
  };
}

export type DatasetName = "cifar10" | "svhn" | "synthetic";

export function loadDataset(
  name: DatasetName,
  dataDir: string | undefined,
  options: LoadOptions & SyntheticOptions = {},
): Dataset {
  switch (name) {
    case "cifar10":
      if (!dataDir) throw new DataError("cifar10 requires --data-dir");
      return loadCifar10(dataDir, options);
    case "svhn":
      if (!dataDir) throw new DataError("svhn requires --data-dir");
      return loadSvhn(dataDir, options);
    case "synthetic":
      return syntheticDataset({
        ...options,
        trainCount: options.limitTrain ?? options.trainCount,
        testCount: options.limitTest ?? options.testCount,
      });
  }
}
