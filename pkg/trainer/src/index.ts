export {
  DocumentError,
  SUPPORTED_FORMAT_VERSION,
  incomingMap,
  loadDocument,
  parseDocument,
  parseDocumentJson,
  type GraphDocument,
  type GraphNode,
  type ModelConfig,
  type NodeRole,
} from "./document.js";
export {
  DataError,
  loadCifar10,
  loadDataset,
  loadSvhn,
  syntheticDataset,
  type Dataset,
  type DatasetName,
  type LoadOptions,
  type SyntheticOptions,
} from "./data.js";
export {
  NetworkModel,
  buildModel,
  type ForwardOptions,
  type ForwardResult,
} from "./model.js";
export {
  DEFAULT_TRAIN_CONFIG,
  TrainError,
  evaluate,
  trainEval,
  type EpochStats,
  type RunReport,
  type TrainConfig,
  type TrainOptions,
} from "./train.js";
