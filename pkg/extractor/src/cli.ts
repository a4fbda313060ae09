#!/usr/bin/env node
/**
 * extract --dataset {cifar-fs|cub} --split novel --ckpt PATH --out PATH
 *
 * Runs the checkpointed backbone over the requested split and writes the
 * FSF1 feature file the classification engine consumes.
 */

import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';
import { extractFeatures, loadBackbone } from './backbone';
import { Dataset, loadCifarFs, loadImageDirectory } from './datasets';
import { writeFeatureFile } from './fsf';

export interface ExtractArgs {
  dataset: string;
  split: string;
  ckpt: string;
  out: string;
  dataRoot: string;
  batch: number;
  layer?: string;
  splitFile?: string;
  inputSize?: number;
  expectDim?: number;
  mean?: string;
  std?: string;
}

function parseTriple(flag: string, value?: string): number[] | undefined {
  if (value === undefined) {
    return undefined;
  }
  const parts = value.split(',').map(Number);
  if (parts.some(Number.isNaN)) {
    throw new Error(`${flag} expects comma-separated numbers, got '${value}'`);
  }
  return parts;
}

export function loadDataset(args: ExtractArgs): Dataset {
  switch (args.dataset) {
    case 'cifar-fs':
      return loadCifarFs(args.dataRoot, args.split, args.splitFile);
    case 'cub':
      return loadImageDirectory(args.dataRoot, args.splitFile);
    default:
      throw new Error(`unknown dataset '${args.dataset}' (expected cifar-fs or cub)`);
  }
}

export async function runExtract(args: ExtractArgs): Promise<void> {
  const dataset = loadDataset(args);
  const model = await loadBackbone(args.ckpt, args.layer);
  const result = await extractFeatures(model, dataset, {
    batchSize: args.batch,
    inputSize: args.inputSize,
    expectDim: args.expectDim,
    mean: parseTriple('--mean', args.mean),
    std: parseTriple('--std', args.std),
  });
  writeFeatureFile(args.out, {
    data: result.data,
    labels: result.labels,
    n: result.n,
    d: result.d,
    classCount: dataset.classCount,
  });
  console.error(
    `wrote ${args.out}: n=${result.n} d=${result.d} classes=${dataset.classCount}`,
  );
}

export async function main(argv: string[]): Promise<number> {
  const parsed = await yargs(argv)
    .command('extract', 'run a backbone over a dataset split and emit features')
    .demandCommand(1)
    .option('dataset', { choices: ['cifar-fs', 'cub'] as const, demandOption: true })
    .option('split', { type: 'string', default: 'novel' })
    .option('ckpt', { type: 'string', demandOption: true, describe: 'checkpoint directory with model.json' })
    .option('out', { type: 'string', demandOption: true })
    .option('data-root', { type: 'string', default: '.', describe: 'dataset directory' })
    .option('batch', { type: 'number', default: 64 })
    .option('layer', { type: 'string', describe: 'truncate the model at this layer' })
    .option('split-file', { type: 'string', describe: 'one class name per line' })
    .option('input-size', { type: 'number' })
    .option('expect-dim', { type: 'number', describe: 'fail unless features have this dimension' })
    .option('mean', { type: 'string', describe: 'per-channel mean, e.g. 0.507,0.487,0.441' })
    .option('std', { type: 'string', describe: 'per-channel std, e.g. 0.267,0.256,0.276' })
    .strict()
    .parse();
  try {
    await runExtract({
      dataset: parsed.dataset,
      split: parsed.split,
      ckpt: parsed.ckpt,
      out: parsed.out,
      dataRoot: parsed['data-root'],
      batch: parsed.batch,
      layer: parsed.layer,
      splitFile: parsed['split-file'],
      inputSize: parsed['input-size'],
      expectDim: parsed['expect-dim'],
      mean: parsed.mean,
      std: parsed.std,
    });
    return 0;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

if (require.main === module) {
  main(hideBin(process.argv)).then(code => {
    process.exitCode = code;
  });
}
