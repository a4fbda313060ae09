export { extractFeatures, loadBackbone } from './backbone';
export type { ExtractOptions, ExtractResult } from './backbone';
export { CIFAR_FS_SPLITS, decodeImage, loadCifarFs, loadImageDirectory } from './datasets';
export type { Dataset, Sample } from './datasets';
export {
  FSF_DTYPE_F32,
  FSF_HEADER_BYTES,
  FSF_MAGIC,
  encodeFeatureFile,
  featureFileBytes,
  readFeatureFile,
  writeFeatureFile,
} from './fsf';
export type { FeatureFile } from './fsf';
export { fileSystemIO } from './model-io';
export { loadDataset, runExtract } from './cli';
