/**
 * GraphDocument loading and validation.
 *
 * The document is the cross-package contract: `format_version` "1", a
 * model config echo, topologically ordered nodes with channel and shape
 * annotations, and directed `[src, dst]` edges. Validation runs in two
 * phases: shape (zod) and semantic checks that name the offending node
 * or edge (unique ids, edge references, topological node order, channel
 * bookkeeping against the declared wiring).
 */
import { readFileSync } from "node:fs";
import { z } from "zod";

// ── schema ────────────────────────────────────────────────────────────────

const positiveInt = z.number().int().min(1);

const blockSchema = z
  .object({ num_layers: positiveInt, growth_rate: positiveInt })
  .strict();

const stemSchema = z
  .object({ kernel: positiveInt, stride: positiveInt, out_channels: positiveInt })
  .strict();

const modelSchema = z
  .object({
    name: z.string().min(1),
    scheme: z.enum(["dense", "short1", "short2"]),
    blocks: z.array(blockSchema).min(1),
    compression: z.number().gt(0).lte(1),
    stem: stemSchema,
    num_classes: positiveInt,
    input_shape: z.tuple([positiveInt, positiveInt, positiveInt]),
  })
  .strict();

const nodeSchema = z
  .object({
    node_id: z.string().regex(/^[a-z][a-z0-9.]*$/),
    role: z.enum(["stem", "conv", "transition", "global_pool", "classifier"]),
    block: positiveInt.nullable(),
    layer: positiveInt.nullable(),
    in_channels: positiveInt,
    out_channels: positiveInt,
    out_height: positiveInt,
    out_width: positiveInt,
  })
  .strict();

export const graphDocumentSchema = z
  .object({
    format_version: z.literal("1"),
    model: modelSchema,
    nodes: z.array(nodeSchema).min(1),
    edges: z.array(z.tuple([z.string(), z.string()])).min(1),
  })
  .strict();

export type GraphDocument = z.infer<typeof graphDocumentSchema>;
export type GraphNode = z.infer<typeof nodeSchema>;
export type ModelConfig = z.infer<typeof modelSchema>;
export type NodeRole = GraphNode["role"];

export const SUPPORTED_FORMAT_VERSION = "1";

export class DocumentError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "DocumentError";
  }
}

// ── parsing ───────────────────────────────────────────────────────────────

/** Source node ids feeding each node, in edge order. */
export function incomingMap(doc: GraphDocument): Map<string, string[]> {
  const incoming = new Map<string, string[]>();
  for (const [src, dst] of doc.edges) {
    const list = incoming.get(dst);
    if (list) list.push(src);
    else incoming.set(dst, [src]);
  }
  return incoming;
}

function semanticCheck(doc: GraphDocument): void {
  const position = new Map<string, number>();
  doc.nodes.forEach((node, index) => {
    if (position.has(node.node_id)) {
      throw new DocumentError(`duplicate node_id ${node.node_id}`);
    }
    position.set(node.node_id, index);
  });

  for (const [src, dst] of doc.edges) {
    for (const end of [src, dst]) {
      if (!position.has(end)) {
        throw new DocumentError(
          `edge [${src}, ${dst}] references unknown node ${end}`,
        );
      }
    }
    if (position.get(src)! >= position.get(dst)!) {
      throw new DocumentError(
        `edge [${src}, ${dst}] violates topological node order`,
      );
    }
  }

  const outChannels = new Map(doc.nodes.map((n) => [n.node_id, n.out_channels]));
  const incoming = incomingMap(doc);
  for (const node of doc.nodes) {
    const sources = incoming.get(node.node_id) ?? [];
    if (node.role === "stem") {
      if (sources.length > 0) {
        throw new DocumentError(`stem node ${node.node_id} has incoming edges`);
      }
      if (node.in_channels !== doc.model.input_shape[0]) {
        throw new DocumentError(
          `channel mismatch at ${node.node_id}: in_channels ` +
            `${node.in_channels} != input channels ${doc.model.input_shape[0]}`,
        );
      }
      continue;
    }
    const provided = sources.reduce((sum, s) => sum + outChannels.get(s)!, 0);
    if (provided !== node.in_channels) {
      throw new DocumentError(
        `channel mismatch at ${node.node_id}: in_channels ` +
          `${node.in_channels} but sources provide ${provided}`,
      );
    }
  }
}

/** Parse and fully validate an already-decoded document value. */
export function parseDocument(raw: unknown): GraphDocument {
  if (typeof raw === "object" && raw !== null && "format_version" in raw) {
    const version = (raw as { format_version: unknown }).format_version;
    if (version !== SUPPORTED_FORMAT_VERSION) {
      throw new DocumentError(
        `unsupported format_version ${JSON.stringify(version)}; ` +
          `this reader supports "${SUPPORTED_FORMAT_VERSION}"`,
      );
    }
  }
  const result = graphDocumentSchema.safeParse(raw);
  if (!result.success) {
    const first = result.error.issues[0]!;
    throw new DocumentError(
      `invalid document at ${first.path.join(".") || "$"}: ${first.message}`,
    );
  }
  semanticCheck(result.data);
  return result.data;
}

/** Parse a JSON string into a validated document. */
export function parseDocumentJson(text: string): GraphDocument {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (err) {
    throw new DocumentError(`invalid JSON: ${(err as Error).message}`);
  }
  return parseDocument(raw);
}

/** Read and validate a document file. */
export function loadDocument(path: string): GraphDocument {
  let text: string;
  try {
    text = readFileSync(path, "utf-8");
  } catch (err) {
    throw new DocumentError(`cannot read ${path}: ${(err as Error).message}`);
  }
  return parseDocumentJson(text);
}
