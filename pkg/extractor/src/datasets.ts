/**
 * Dataset loaders: CIFAR-FS (from the CIFAR-100 binary distribution) and
 * CUB-style image directories. Both yield raw pixel samples in [0, 255]
 * with labels already re-indexed densely in split order.
 */

import * as fs from 'fs';
import * as path from 'path';
import * as jpeg from 'jpeg-js';
import { PNG } from 'pngjs';

export interface Sample {
  /** HWC pixel values in [0, 255]. */
  pixels: Float32Array;
  height: number;
  width: number;
  channels: number;
  label: number;
}

export interface Dataset {
  samples(): Generator<Sample>;
  classCount: number;
  classNames: string[];
}

/**
 * The 64/16/20 class partition over CIFAR-100 commonly used for few-shot
 * benchmarks. Override with --split-file when reproducing another split.
 */
export const CIFAR_FS_SPLITS: Record<string, string[]> = {
  validation: [
    'otter', 'motorcycle', 'television', 'lamp', 'crocodile', 'shark',
    'butterfly', 'beaver', 'beetle', 'tractor', 'flatfish', 'maple_tree',
    'camel', 'crab', 'sea', 'cattle',
  ],
  novel: [
    'baby', 'bed', 'bicycle', 'chimpanzee', 'fox', 'leopard', 'man',
    'pickup_truck', 'plain', 'poppy', 'rocket', 'rose', 'snail',
    'sweet_pepper', 'table', 'telephone', 'wardrobe', 'whale', 'woman',
    'worm',
  ],
};

const CIFAR_RECORD_BYTES = 2 + 3 * 32 * 32; // coarse label, fine label, RGB planes

export function readSplitFile(file: string): string[] {
  return fs
    .readFileSync(file, 'utf8')
    .split(/\r?\n/)
    .map(line => line.trim())
    .filter(line => line.length > 0);
}

function cifarSplitClasses(root: string, split: string, splitFile?: string): string[] {
  if (splitFile) {
    return readSplitFile(splitFile);
  }
  const names = CIFAR_FS_SPLITS[split];
  if (names) {
    return names;
  }
  if (split === 'train') {
    const all = readCifarLabelNames(root);
    const held = new Set([...CIFAR_FS_SPLITS.validation, ...CIFAR_FS_SPLITS.novel]);
    return all.filter(name => !held.has(name));
  }
  throw new Error(`unknown split '${split}'; pass --split-file`);
}

function readCifarLabelNames(root: string): string[] {
  const file = path.join(root, 'fine_label_names.txt');
  if (!fs.existsSync(file)) {
    throw new Error(`missing ${file} (expected the CIFAR-100 binary layout)`);
  }
  return readSplitFile(file);
}

/**
 * Loads the classes of one CIFAR-FS split from a CIFAR-100 binary
 * directory (train.bin + test.bin + fine_label_names.txt). The few-shot
 * splits partition by class, so both archives contribute rows.
 */
export function loadCifarFs(root: string, split: string, splitFile?: string): Dataset {
  const names = readCifarLabelNames(root);
  const wanted = cifarSplitClasses(root, split, splitFile);
  const fineToDense = new Map<number, number>();
  wanted.forEach((name, dense) => {
    const fine = names.indexOf(name);
    if (fine < 0) {
      throw new Error(`split class '${name}' is not a CIFAR-100 fine label`);
    }
    fineToDense.set(fine, dense);
  });
  const bins = ['train.bin', 'test.bin']
    .map(f => path.join(root, f))
    .filter(f => fs.existsSync(f));
  if (bins.length === 0) {
    throw new Error(`no train.bin/test.bin under ${root}`);
  }
  function* samples(): Generator<Sample> {
    for (const bin of bins) {
      const raw = fs.readFileSync(bin);
      if (raw.length % CIFAR_RECORD_BYTES !== 0) {
        throw new Error(`${bin}: size ${raw.length} is not a whole number of records`);
      }
      for (let off = 0; off < raw.length; off += CIFAR_RECORD_BYTES) {
        const dense = fineToDense.get(raw[off + 1]);
        if (dense === undefined) {
          continue;
        }
        yield { pixels: cifarPixels(raw, off + 2), height: 32, width: 32, channels: 3, label: dense };
      }
    }
  }
  return { samples, classCount: wanted.length, classNames: wanted };
}

function cifarPixels(raw: Buffer, off: number): Float32Array {
  // planar RGB to interleaved HWC
  const area = 32 * 32;
  const out = new Float32Array(area * 3);
  for (let p = 0; p < area; p++) {
    out[p * 3] = raw[off + p];
    out[p * 3 + 1] = raw[off + area + p];
    out[p * 3 + 2] = raw[off + 2 * area + p];
  }
  return out;
}

/**
 * Loads an image-directory dataset (CUB layout): root/<class_dir>/<image>.
 * The split file lists one class directory name per line; classes are
 * re-indexed densely in file order.
 */
export function loadImageDirectory(root: string, splitFile: string | undefined): Dataset {
  if (!splitFile) {
    throw new Error('image-directory datasets need --split-file (one class directory per line)');
  }
  const wanted = readSplitFile(splitFile);
  for (const cls of wanted) {
    if (!fs.existsSync(path.join(root, cls))) {
      throw new Error(`class directory not found: ${path.join(root, cls)}`);
    }
  }
  function* samples(): Generator<Sample> {
    for (let dense = 0; dense < wanted.length; dense++) {
      const dir = path.join(root, wanted[dense]);
      const files = fs.readdirSync(dir).filter(f => /\.(jpe?g|png)$/i.test(f)).sort();
      for (const file of files) {
        yield { ...decodeImage(path.join(dir, file)), label: dense };
      }
    }
  }
  return { samples, classCount: wanted.length, classNames: wanted };
}

export function decodeImage(file: string): Omit<Sample, 'label'> {
  const raw = fs.readFileSync(file);
  if (/\.png$/i.test(file)) {
    const png = PNG.sync.read(raw);
    return rgbaToRgb(png.data, png.height, png.width);
  }
  const img = jpeg.decode(raw, { useTArray: true, formatAsRGBA: true });
  return rgbaToRgb(img.data, img.height, img.width);
}

function rgbaToRgb(data: Uint8Array | Buffer, height: number, width: number) {
  const out = new Float32Array(height * width * 3);
  for (let p = 0; p < height * width; p++) {
    out[p * 3] = data[p * 4];
    out[p * 3 + 1] = data[p * 4 + 1];
    out[p * 3 + 2] = data[p * 4 + 2];
  }
  return { pixels: out, height, width, channels: 3 };
}
