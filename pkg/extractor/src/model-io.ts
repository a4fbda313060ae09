/**
 * Filesystem IO handler for tf.js models.
 *
 * The pure-JS tfjs build has no `file://` scheme in Node, so saving and
 * loading layers models from a checkpoint directory needs a small custom
 * handler: `model.json` holds the topology and the weights manifest,
 * sibling binary files hold the weight data.
 */

import * as fs from 'fs';
import * as path from 'path';
import type * as tf from '@tensorflow/tfjs';

interface WeightsManifestGroup {
  paths: string[];
  weights: tf.io.WeightsManifestEntry[];
}

export function fileSystemIO(dir: string): tf.io.IOHandler {
  return {
    async save(artifacts: tf.io.ModelArtifacts): Promise<tf.io.SaveResult> {
      fs.mkdirSync(dir, { recursive: true });
      const weightData = artifacts.weightData as ArrayBuffer;
      fs.writeFileSync(path.join(dir, 'weights.bin'), Buffer.from(weightData));
      const manifest: WeightsManifestGroup[] = [
        { paths: ['weights.bin'], weights: artifacts.weightSpecs ?? [] },
      ];
      const modelJson = {
        modelTopology: artifacts.modelTopology,
        format: artifacts.format,
        generatedBy: artifacts.generatedBy,
        convertedBy: artifacts.convertedBy ?? null,
        weightsManifest: manifest,
      };
      fs.writeFileSync(path.join(dir, 'model.json'), JSON.stringify(modelJson));
      return {
        modelArtifactsInfo: {
          dateSaved: new Date(),
          modelTopologyType: 'JSON',
          weightDataBytes: weightData.byteLength,
        },
      };
    },

    async load(): Promise<tf.io.ModelArtifacts> {
      const jsonPath = path.join(dir, 'model.json');
      if (!fs.existsSync(jsonPath)) {
        throw new Error(`checkpoint not found: ${jsonPath}`);
      }
      const modelJson = JSON.parse(fs.readFileSync(jsonPath, 'utf8'));
      const groups: WeightsManifestGroup[] = modelJson.weightsManifest ?? [];
      const weightSpecs: tf.io.WeightsManifestEntry[] = [];
      const buffers: Buffer[] = [];
      for (const group of groups) {
        weightSpecs.push(...group.weights);
        for (const rel of group.paths) {
          buffers.push(fs.readFileSync(path.join(dir, rel)));
        }
      }
      const joined = Buffer.concat(buffers);
      const weightData = joined.buffer.slice(
        joined.byteOffset,
        joined.byteOffset + joined.byteLength,
      );
      return {
        modelTopology: modelJson.modelTopology,
        format: modelJson.format,
        generatedBy: modelJson.generatedBy,
        weightSpecs,
        weightData,
      };
    },
  };
}
