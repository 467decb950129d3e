/**
 * Trainable model assembled from a GraphDocument.
 *
 * Every composite node owns its variables:
 *  - stem / conv / transition: BN scale+shift on the input channels
 *    (trainable, plus non-trainable running moments), then ReLU, then a
 *    bias-free conv kernel; transitions append a 2x2 average pool.
 *  - classifier: dense weight + bias, the only bias in the network.
 *
 * The forward pass walks the document's (topologically ordered) nodes
 * and builds each node's input by concatenating, along the channel
 * axis, exactly the predecessor outputs listed by the document's edges,
 * in edge order. Trainable parameter counts therefore match the
 * analytic cost model integer-for-integer: kh*kw*in*out + 2*in per conv
 * composite, in*out + out for the classifier.
 *
 * Connectivity probes: `captureOutputs` runs one clean pass keeping
 * every node output; `composeInput` rebuilds a node's input from that
 * cache, optionally with one cached entry zeroed while all other
 * activations stay frozen. A zeroed entry changes the rebuilt input iff
 * the zeroed node is a direct predecessor, which is the wiring property
 * the document promises.
 */
import * as tf from "@tensorflow/tfjs";

import {
  DocumentError,
  type GraphDocument,
  type GraphNode,
  incomingMap,
} from "./document.js";

const BN_EPSILON = 1e-3;
const DEFAULT_BN_MOMENTUM = 0.9;

interface CompositeVars {
  kind: "composite";
  gamma: tf.Variable;
  beta: tf.Variable;
  movingMean: tf.Variable;
  movingVariance: tf.Variable;
  kernel: tf.Variable;
  stride: number;
  pool: boolean;
}

interface DenseVars {
  kind: "dense";
  weight: tf.Variable;
  bias: tf.Variable;
}

interface PoolVars {
  kind: "global_pool";
}

type NodeVars = CompositeVars | DenseVars | PoolVars;

export interface ForwardOptions {
  /** Update BN running moments and normalize with batch statistics. */
  training?: boolean;
  /** Node ids whose concatenated input tensors to keep and return. */
  captureInputs?: ReadonlySet<string>;
}

export interface ModelOptions {
  /**
   * Running-moment decay for BN. Short runs (few optimizer steps) need
   * a smaller value or inference statistics lag the trained network.
   */
  bnMomentum?: number;
}

export interface ForwardResult {
  logits: tf.Tensor2D;
  /** Kept tensors; the caller disposes them. */
  capturedInputs: Map<string, tf.Tensor>;
}

export class NetworkModel {
  // variable names are engine-global in tfjs; scope them per instance
  private static instances = 0;
  private readonly scope = `m${NetworkModel.instances++}`;

  readonly document: GraphDocument;
  private readonly incoming: Map<string, string[]>;
  private readonly vars = new Map<string, NodeVars>();
  private readonly classifierId: string;
  private readonly bnMomentum: number;
  /** Walk index of each node's last consumer, for eval-mode pruning. */
  private readonly lastUse = new Map<string, number>();

  constructor(document: GraphDocument, seed = 0, options: ModelOptions = {}) {
    this.document = document;
    this.incoming = incomingMap(document);
    this.bnMomentum = options.bnMomentum ?? DEFAULT_BN_MOMENTUM;
    if (!(this.bnMomentum > 0 && this.bnMomentum < 1)) {
      throw new RangeError(`bnMomentum must be in (0, 1), got ${this.bnMomentum}`);
    }

    const classifier = document.nodes.find((n) => n.role === "classifier");
    if (!classifier) {
      throw new DocumentError("document has no classifier node");
    }
    this.classifierId = classifier.node_id;

    document.nodes.forEach((node, index) => {
      for (const src of this.incoming.get(node.node_id) ?? []) {
        this.lastUse.set(src, index);
      }
    });

    // tidy reclaims the initializer tensors; variables survive it
    let variableSeed = seed;
    tf.tidy(() => {
      for (const node of document.nodes) {
        variableSeed += 1;
        this.vars.set(node.node_id, this.buildVars(node, variableSeed));
      }
    });
  }

  private buildVars(node: GraphNode, seed: number): NodeVars {
    const name = `${this.scope}/${node.node_id}`;
    if (node.role === "global_pool") {
      return { kind: "global_pool" };
    }
    if (node.role === "classifier") {
      const fanIn = node.in_channels;
      const weight = tf.variable(
        tf.randomNormal(
          [node.in_channels, node.out_channels],
          0,
          Math.sqrt(2 / fanIn),
          "float32",
          seed,
        ),
        true,
        `${name}/weight`,
      );
      const bias = tf.variable(
        tf.zeros([node.out_channels]),
        true,
        `${name}/bias`,
      );
      return { kind: "dense", weight, bias };
    }

    const kernelSize =
      node.role === "stem"
        ? this.document.model.stem.kernel
        : node.role === "conv"
          ? 3
          : 1;
    const stride = node.role === "stem" ? this.document.model.stem.stride : 1;
    const fanIn = kernelSize * kernelSize * node.in_channels;
    const kernel = tf.variable(
      tf.randomNormal(
        [kernelSize, kernelSize, node.in_channels, node.out_channels],
        0,
        Math.sqrt(2 / fanIn),
        "float32",
        seed,
      ),
      true,
      `${name}/kernel`,
    );
    return {
      kind: "composite",
      gamma: tf.variable(tf.ones([node.in_channels]), true, `${name}/gamma`),
      beta: tf.variable(tf.zeros([node.in_channels]), true, `${name}/beta`),
      movingMean: tf.variable(
        tf.zeros([node.in_channels]),
        false,
        `${name}/moving_mean`,
      ),
      movingVariance: tf.variable(
        tf.ones([node.in_channels]),
        false,
        `${name}/moving_variance`,
      ),
      kernel,
      stride,
      pool: node.role === "transition",
    };
  }

  // ── parameters ──────────────────────────────────────────────────────────

  trainableVariables(): tf.Variable[] {
    const out: tf.Variable[] = [];
    for (const entry of this.vars.values()) {
      if (entry.kind === "composite") {
        out.push(entry.gamma, entry.beta, entry.kernel);
      } else if (entry.kind === "dense") {
        out.push(entry.weight, entry.bias);
      }
    }
    return out;
  }

  /** Sum of trainable weight element counts (BN moments excluded). */
  trainableParamCount(): number {
    return this.trainableVariables().reduce(
      (sum, v) => sum + v.shape.reduce((a, b) => a * b, 1),
      0,
    );
  }

  // ── forward ─────────────────────────────────────────────────────────────

  private composite(
    input: tf.Tensor4D,
    entry: CompositeVars,
    training: boolean,
  ): tf.Tensor4D {
    let normalized: tf.Tensor4D;
    if (training) {
      const { mean, variance } = tf.moments(input, [0, 1, 2]);
      normalized = tf.batchNorm4d(
        input,
        mean as tf.Tensor1D,
        variance as tf.Tensor1D,
        entry.beta as unknown as tf.Tensor1D,
        entry.gamma as unknown as tf.Tensor1D,
        BN_EPSILON,
      );
      // moving-average update; outside the gradient path
      const momentum = this.bnMomentum;
      entry.movingMean.assign(
        tf.add(tf.mul(entry.movingMean, momentum), tf.mul(mean, 1 - momentum)),
      );
      entry.movingVariance.assign(
        tf.add(
          tf.mul(entry.movingVariance, momentum),
          tf.mul(variance, 1 - momentum),
        ),
      );
    } else {
      normalized = tf.batchNorm4d(
        input,
        entry.movingMean as unknown as tf.Tensor1D,
        entry.movingVariance as unknown as tf.Tensor1D,
        entry.beta as unknown as tf.Tensor1D,
        entry.gamma as unknown as tf.Tensor1D,
        BN_EPSILON,
      );
    }
    const activated = tf.relu(normalized);
    let out = tf.conv2d(
      activated,
      entry.kernel as unknown as tf.Tensor4D,
      entry.stride,
      "same",
    );
    if (entry.pool) {
      out = tf.avgPool(out, 2, 2, "valid");
    }
    return out;
  }

  private nodeInput(
    nodeId: string,
    modelInput: tf.Tensor4D,
    outputs: Map<string, tf.Tensor>,
  ): tf.Tensor {
    const sources = this.incoming.get(nodeId) ?? [];
    if (sources.length === 0) return modelInput;
    if (sources.length === 1) return outputs.get(sources[0]!)!;
    return tf.concat(
      sources.map((s) => outputs.get(s)!),
      -1,
    );
  }

  /**
   * Run the network on an NHWC batch. Returns logits `[batch, classes]`
   * plus any requested captured node inputs (kept tensors).
   */
  forward(x: tf.Tensor4D, options: ForwardOptions = {}): ForwardResult {
    const { training = false, captureInputs } = options;
    const captured = new Map<string, tf.Tensor>();
    const logits = tf.tidy(() => {
      const outputs = new Map<string, tf.Tensor>();
      this.document.nodes.forEach((node, index) => {
        const input = this.nodeInput(node.node_id, x, outputs);
        if (captureInputs?.has(node.node_id)) {
          captured.set(node.node_id, tf.keep(input.clone()));
        }
        outputs.set(node.node_id, this.computeNode(node, input, training));
        if (!training) {
          // free outputs past their last consumer; the tape owns
          // nothing in eval mode so disposal is safe
          const sources = this.incoming.get(node.node_id) ?? [];
          if (sources.length > 1) input.dispose();
          for (const src of sources) {
            if (this.lastUse.get(src) === index) {
              outputs.get(src)?.dispose();
              outputs.delete(src);
            }
          }
        }
      });
      return outputs.get(this.classifierId) as tf.Tensor2D;
    });
    return { logits, capturedInputs: captured };
  }

  private computeNode(
    node: GraphNode,
    input: tf.Tensor,
    training: boolean,
  ): tf.Tensor {
    const entry = this.vars.get(node.node_id)!;
    switch (entry.kind) {
      case "composite":
        return this.composite(input as tf.Tensor4D, entry, training);
      case "global_pool":
        return tf.mean(input as tf.Tensor4D, [1, 2]);
      case "dense":
        return tf.add(
          tf.matMul(input as tf.Tensor2D, entry.weight as unknown as tf.Tensor2D),
          entry.bias,
        );
    }
  }

  /** Eval-mode logits. */
  predict(x: tf.Tensor4D): tf.Tensor2D {
    return this.forward(x).logits;
  }

  // ── connectivity probes ─────────────────────────────────────────────────

  /** One clean eval pass; returns every node's output as kept tensors. */
  captureOutputs(x: tf.Tensor4D): Map<string, tf.Tensor> {
    const outputs = new Map<string, tf.Tensor>();
    tf.tidy(() => {
      const live = new Map<string, tf.Tensor>();
      for (const node of this.document.nodes) {
        const input = this.nodeInput(node.node_id, x, live);
        const out = this.computeNode(node, input, false);
        live.set(node.node_id, out);
        outputs.set(node.node_id, tf.keep(out.clone()));
      }
    });
    return outputs;
  }

  /**
   * Rebuild `targetId`'s input from cached outputs, with `zeroedId`'s
   * cache entry (if given) replaced by zeros while every other
   * activation stays frozen at its clean value. The result differs from
   * the clean rebuild iff `zeroedId` is a direct predecessor of the
   * target.
   */
  composeInput(
    targetId: string,
    outputs: Map<string, tf.Tensor>,
    zeroedId?: string,
  ): tf.Tensor {
    const sources = this.incoming.get(targetId);
    if (!sources || sources.length === 0) {
      throw new Error(`node ${targetId} has no incoming edges`);
    }
    return tf.tidy(() => {
      const parts = sources.map((s) => {
        const cached = outputs.get(s);
        if (!cached) throw new Error(`no cached output for ${s}`);
        return s === zeroedId ? tf.zerosLike(cached) : cached;
      });
      return parts.length === 1 ? parts[0]!.clone() : tf.concat(parts, -1);
    });
  }

  dispose(): void {
    for (const entry of this.vars.values()) {
      if (entry.kind === "composite") {
        entry.gamma.dispose();
        entry.beta.dispose();
        entry.movingMean.dispose();
        entry.movingVariance.dispose();
        entry.kernel.dispose();
      } else if (entry.kind === "dense") {
        entry.weight.dispose();
        entry.bias.dispose();
      }
    }
    this.vars.clear();
  }
}

/** Convenience: validated document in, ready model out. */
export function buildModel(
  document: GraphDocument,
  seed = 0,
  options: ModelOptions = {},
): NetworkModel {
  return new NetworkModel(document, seed, options);
}
