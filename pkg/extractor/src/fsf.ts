/**
 * FSF1 feature-file format: the binary interface consumed by the
 * classification engine.
 *
 * Layout (little-endian):
 *   magic   4 bytes  "FSF1"
 *   n       uint32   row count
 *   d       uint32   feature dimension
 *   classes uint32   class count
 *   dtype   uint8    0 = float32
 *   records n x { label: uint32, vec: d x float32 }
 */

import * as fs from 'fs';

export const FSF_MAGIC = 'FSF1';
export const FSF_HEADER_BYTES = 17;
export const FSF_DTYPE_F32 = 0;

export interface FeatureFile {
  /** Row-major n*d feature values. */
  data: Float32Array;
  labels: Uint32Array;
  n: number;
  d: number;
  classCount: number;
}

export function featureFileBytes(n: number, d: number): number {
  return FSF_HEADER_BYTES + n * (4 + 4 * d);
}

export function encodeFeatureFile(file: FeatureFile): Buffer {
  const { data, labels, n, d, classCount } = file;
  if (n < 1 || d < 1) {
    throw new Error(`need n,d >= 1, got n=${n} d=${d}`);
  }
  if (data.length !== n * d || labels.length !== n) {
    throw new Error(
      `layout mismatch: ${data.length} values, ${labels.length} labels for n=${n} d=${d}`,
    );
  }
  for (let i = 0; i < n; i++) {
    if (labels[i] >= classCount) {
      throw new Error(`label ${labels[i]} outside [0, ${classCount})`);
    }
  }
  for (let i = 0; i < data.length; i++) {
    if (!Number.isFinite(data[i])) {
      throw new Error(`non-finite feature value at flat index ${i}`);
    }
  }
  const buf = Buffer.alloc(featureFileBytes(n, d));
  buf.write(FSF_MAGIC, 0, 'ascii');
  buf.writeUInt32LE(n, 4);
  buf.writeUInt32LE(d, 8);
  buf.writeUInt32LE(classCount, 12);
  buf.writeUInt8(FSF_DTYPE_F32, 16);
  let off = FSF_HEADER_BYTES;
  for (let i = 0; i < n; i++) {
    buf.writeUInt32LE(labels[i], off);
    off += 4;
    for (let k = 0; k < d; k++) {
      buf.writeFloatLE(data[i * d + k], off);
      off += 4;
    }
  }
  return buf;
}

export function writeFeatureFile(path: string, file: FeatureFile): void {
  fs.writeFileSync(path, encodeFeatureFile(file));
}

export function readFeatureFile(path: string): FeatureFile {
  const buf = fs.readFileSync(path);
  if (buf.length < FSF_HEADER_BYTES) {
    throw new Error(`${path}: ${buf.length} bytes is smaller than the header`);
  }
  const magic = buf.toString('ascii', 0, 4);
  if (magic !== FSF_MAGIC) {
    throw new Error(`${path}: expected magic ${FSF_MAGIC}, found ${magic}`);
  }
  const n = buf.readUInt32LE(4);
  const d = buf.readUInt32LE(8);
  const classCount = buf.readUInt32LE(12);
  const dtype = buf.readUInt8(16);
  if (dtype !== FSF_DTYPE_F32) {
    throw new Error(`${path}: unknown dtype code ${dtype}`);
  }
  if (buf.length !== featureFileBytes(n, d)) {
    throw new Error(`${path}: expected ${featureFileBytes(n, d)} bytes, found ${buf.length}`);
  }
  const data = new Float32Array(n * d);
  const labels = new Uint32Array(n);
  let off = FSF_HEADER_BYTES;
  for (let i = 0; i < n; i++) {
    labels[i] = buf.readUInt32LE(off);
    off += 4;
    if (labels[i] >= classCount) {
      throw new Error(`${path}: label ${labels[i]} outside [0, ${classCount})`);
    }
    for (let k = 0; k < d; k++) {
      data[i * d + k] = buf.readFloatLE(off);
      off += 4;
      if (!Number.isFinite(data[i * d + k])) {
        throw new Error(`${path}: non-finite value in row ${i}`);
      }
    }
  }
  return { data, labels, n, d, classCount };
}
