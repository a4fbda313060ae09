import { spawnSync } from 'child_process';
import * as fs from 'fs';
import * as os from 'os';
import * as path from 'path';
import * as tf from '@tensorflow/tfjs';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';
import { extractFeatures, loadBackbone } from '../src/backbone';
import { runExtract } from '../src/cli';
import { loadCifarFs } from '../src/datasets';
import { fileSystemIO } from '../src/model-io';
import { readFeatureFile } from '../src/fsf';

let root: string;

const CLASS_NAMES = Array.from({ length: 10 }, (_, i) => `class_${i}`);
const SPLIT = ['class_2', 'class_5', 'class_7'];
const PER_CLASS_TRAIN = 4;
const PER_CLASS_TEST = 2;

function writeCifarBin(file: string, perClass: number, seedBase: number): void {
  const record = 2 + 3072;
  const buf = Buffer.alloc(CLASS_NAMES.length * perClass * record);
  let off = 0;
  for (let fine = 0; fine < CLASS_NAMES.length; fine++) {
    for (let k = 0; k < perClass; k++) {
      buf.writeUInt8(0, off); // coarse label, unused
      buf.writeUInt8(fine, off + 1);
      for (let p = 0; p < 3072; p++) {
        // deterministic pixels that differ by class and image
        buf.writeUInt8((seedBase + fine * 37 + k * 11 + p) % 256, off + 2 + p);
      }
      off += record;
    }
  }
  fs.writeFileSync(file, buf);
}

async function saveToyBackbone(dir: string, seed: number): Promise<void> {
  const model = tf.sequential({
    layers: [
      tf.layers.conv2d({
        inputShape: [32, 32, 3],
        filters: 6,
        kernelSize: 3,
        activation: 'relu',
        kernelInitializer: tf.initializers.glorotUniform({ seed }),
      }),
      tf.layers.globalAveragePooling2d({}),
    ],
  });
  await model.save(fileSystemIO(dir));
}

beforeAll(async () => {
  root = fs.mkdtempSync(path.join(os.tmpdir(), 'extract-'));
  fs.writeFileSync(path.join(root, 'fine_label_names.txt'), CLASS_NAMES.join('\n') + '\n');
  writeCifarBin(path.join(root, 'train.bin'), PER_CLASS_TRAIN, 3);
  writeCifarBin(path.join(root, 'test.bin'), PER_CLASS_TEST, 101);
  fs.writeFileSync(path.join(root, 'split.txt'), SPLIT.join('\n') + '\n');
  await saveToyBackbone(path.join(root, 'ckpt'), 7);
});

afterAll(() => {
  fs.rmSync(root, { recursive: true, force: true });
});

describe('cifar-fs loader', () => {
  it('filters split classes from both archives and re-labels densely', () => {
    const ds = loadCifarFs(root, 'novel', path.join(root, 'split.txt'));
    expect(ds.classCount).toBe(3);
    const counts = [0, 0, 0];
    for (const sample of ds.samples()) {
      counts[sample.label]++;
      expect(sample.height).toBe(32);
      expect(sample.pixels.length).toBe(32 * 32 * 3);
    }
    expect(counts).toEqual([6, 6, 6]); // 4 train + 2 test per class
  });

  it('rejects split classes that are not fine labels', () => {
    const bad = path.join(root, 'bad-split.txt');
    fs.writeFileSync(bad, 'class_2\nno_such_class\n');
    expect(() => loadCifarFs(root, 'novel', bad)).toThrow(/fine label/);
  });
});

describe('model checkpoint round trip', () => {
  it('reloads a saved model with identical predictions', async () => {
    const model = await loadBackbone(path.join(root, 'ckpt'));
    const x = tf.ones([1, 32, 32, 3]) as tf.Tensor4D;
    const fresh = (model.predict(x) as tf.Tensor).dataSync();
    const again = await loadBackbone(path.join(root, 'ckpt'));
    const reloaded = (again.predict(x) as tf.Tensor).dataSync();
    expect(Array.from(reloaded)).toEqual(Array.from(fresh));
  });
});

describe('feature extraction', () => {
  it('emits nonnegative features with the model dimension', async () => {
    const ds = loadCifarFs(root, 'novel', path.join(root, 'split.txt'));
    const model = await loadBackbone(path.join(root, 'ckpt'));
    const result = await extractFeatures(model, ds, { batchSize: 5 });
    expect(result.n).toBe(18);
    expect(result.d).toBe(6);
    for (const v of result.data) {
      expect(v).toBeGreaterThanOrEqual(0);
    }
  });

  it('enforces --expect-dim', async () => {
    const ds = loadCifarFs(root, 'novel', path.join(root, 'split.txt'));
    const model = await loadBackbone(path.join(root, 'ckpt'));
    await expect(extractFeatures(model, ds, { expectDim: 640 })).rejects.toThrow(
      /dimension 6 does not match expected 640/,
    );
  });

  it('rejects backbones with negative activations', async () => {
    const dir = path.join(root, 'linear-ckpt');
    const model = tf.sequential({
      layers: [
        tf.layers.flatten({ inputShape: [32, 32, 3] }),
        tf.layers.dense({
          units: 4,
          kernelInitializer: tf.initializers.glorotUniform({ seed: 1 }),
        }),
      ],
    });
    await model.save(fileSystemIO(dir));
    const ds = loadCifarFs(root, 'novel', path.join(root, 'split.txt'));
    const loaded = await loadBackbone(dir);
    await expect(extractFeatures(loaded, ds)).rejects.toThrow(/nonnegative/);
  });

  it('end-to-end CLI run is deterministic and readable', async () => {
    const outA = path.join(root, 'a.fsf');
    const outB = path.join(root, 'b.fsf');
    for (const out of [outA, outB]) {
      await runExtract({
        dataset: 'cifar-fs',
        split: 'novel',
        ckpt: path.join(root, 'ckpt'),
        out,
        dataRoot: root,
        batch: 7,
        splitFile: path.join(root, 'split.txt'),
      });
    }
    expect(fs.readFileSync(outA).equals(fs.readFileSync(outB))).toBe(true);
    const file = readFeatureFile(outA);
    expect(file.n).toBe(18);
    expect(file.d).toBe(6);
    expect(file.classCount).toBe(3);
    // labels grouped per class in split order, 6 rows each
    expect(Array.from(file.labels).sort()).toEqual(
      [0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2],
    );
  });

  it('emitted files parse with the engine reader when available', async () => {
    const probe = spawnSync('python3', ['-c', 'import fsot'], { encoding: 'utf8' });
    if (probe.status !== 0) {
      console.warn('engine package unavailable; skipping cross-check');
      return;
    }
    const out = path.join(root, 'cross.fsf');
    await runExtract({
      dataset: 'cifar-fs',
      split: 'novel',
      ckpt: path.join(root, 'ckpt'),
      out,
      dataRoot: root,
      batch: 16,
      splitFile: path.join(root, 'split.txt'),
    });
    const check = spawnSync(
      'python3',
      [
        '-c',
        'import sys\n' +
        'from fsot import read_features\n' +
        'fs = read_features(sys.argv[1])\n' +
        'print(fs.n, fs.d, fs.class_count, fs.data.min() >= 0)',
        out,
      ],
      { encoding: 'utf8' },
    );
    expect(check.status).toBe(0);
    expect(check.stdout.trim()).toBe('18 6 3 True');
  });
});
