/**
 * Backbone inference: load a layers-model checkpoint, run batched forward
 * passes with the standard resize/normalize preprocessing (no
 * augmentation), and collect flat feature rows.
 */

import * as tf from '@tensorflow/tfjs';
import { Dataset, Sample } from './datasets';
import { fileSystemIO } from './model-io';

export interface PreprocessOptions {
  /** Side length the input is resized to; defaults to the model's input. */
  inputSize?: number;
  /** Per-channel mean, applied after scaling to [0, 1]. */
  mean?: number[];
  /** Per-channel std divisor, applied after the mean. */
  std?: number[];
}

export interface ExtractOptions extends PreprocessOptions {
  batchSize?: number;
  /** Take this layer's output instead of the model output. */
  layer?: string;
  /** Fail if the feature dimension differs (e.g. 640 for WRN-28-10). */
  expectDim?: number;
}

export interface ExtractResult {
  data: Float32Array;
  labels: Uint32Array;
  n: number;
  d: number;
}

export async function loadBackbone(ckptDir: string, layer?: string): Promise<tf.LayersModel> {
  const model = await tf.loadLayersModel(fileSystemIO(ckptDir));
  if (!layer) {
    return model;
  }
  const out = model.getLayer(layer).output as tf.SymbolicTensor;
  return tf.model({ inputs: model.inputs, outputs: out });
}

function modelInputSize(model: tf.LayersModel): number | undefined {
  const shape = model.inputs[0].shape;
  const side = shape[1];
  return typeof side === 'number' && side > 0 ? side : undefined;
}

function batchTensor(batch: Sample[], opts: PreprocessOptions, side: number): tf.Tensor4D {
  return tf.tidy(() => {
    const imgs = batch.map(s => {
      let t = tf.tensor3d(s.pixels, [s.height, s.width, s.channels]);
      if (s.height !== side || s.width !== side) {
        t = tf.image.resizeBilinear(t, [side, side]);
      }
      return t;
    });
    let x = tf.stack(imgs) as tf.Tensor4D;
    x = x.div(255.0);
    if (opts.mean) {
      x = x.sub(tf.tensor1d(opts.mean));
    }
    if (opts.std) {
      x = x.div(tf.tensor1d(opts.std));
    }
    return x;
  });
}

/**
 * Runs the backbone over every sample of the dataset. Features must come
 * out nonnegative (post-ReLU activations); anything negative aborts before
 * a file is written.
 */
export async function extractFeatures(
  model: tf.LayersModel,
  dataset: Dataset,
  opts: ExtractOptions = {},
): Promise<ExtractResult> {
  const batchSize = opts.batchSize ?? 64;
  const side = opts.inputSize ?? modelInputSize(model) ?? 32;
  const rows: Float32Array[] = [];
  const labels: number[] = [];
  let dim = -1;

  let batch: Sample[] = [];
  const flush = () => {
    if (batch.length === 0) {
      return;
    }
    const x = batchTensor(batch, opts, side);
    const y = model.predict(x, { batchSize: batch.length }) as tf.Tensor;
    const flat = y.reshape([batch.length, -1]) as tf.Tensor2D;
    const values = flat.dataSync() as Float32Array;
    const d = flat.shape[1];
    x.dispose();
    y.dispose();
    flat.dispose();
    if (dim < 0) {
      dim = d;
      if (opts.expectDim !== undefined && dim !== opts.expectDim) {
        throw new Error(`feature dimension ${dim} does not match expected ${opts.expectDim}`);
      }
    } else if (d !== dim) {
      throw new Error(`feature dimension changed between batches: ${dim} vs ${d}`);
    }
    for (let i = 0; i < batch.length; i++) {
      const row = values.slice(i * d, (i + 1) * d);
      for (let k = 0; k < d; k++) {
        if (!(row[k] >= 0)) {
          throw new Error(
            `negative or non-finite feature ${row[k]} in row ${rows.length}; ` +
            'the engine needs post-ReLU (nonnegative) activations',
          );
        }
      }
      rows.push(row);
      labels.push(batch[i].label);
    }
    batch = [];
  };

  for (const sample of dataset.samples()) {
    batch.push(sample);
    if (batch.length >= batchSize) {
      flush();
    }
  }
  flush();

  if (rows.length === 0) {
    throw new Error('dataset produced no samples');
  }
  const data = new Float32Array(rows.length * dim);
  rows.forEach((row, i) => data.set(row, i * dim));
  return { data, labels: Uint32Array.from(labels), n: rows.length, d: dim };
}
