/**
 * Adapter CLI: `extract-text` and `extract-images` write embedding JSONL
 * files that the taxonomy-expansion engine loads as-is.
 */

import { parseArgs } from 'node:util'

import { DecodeError, EncodingError, ModelLoadError } from './errors.js'
import {
  DIM_DEFAULT,
  IMAGE_MODEL_DEFAULT,
  TEXT_MODEL_DEFAULT,
  extractImages,
  extractText,
} from './extract.js'

function usage(): never {
  console.error(
    'usage:\n' +
    '  cli extract-text   --terms FILE --out FILE [--mode pooled|tokens] ' +
    '[--model ID] [--dim N] [--batch-size N]\n' +
    '  cli extract-images --images DIR --out FILE [--model ID] [--dim N] [--batch-size N]',
  )
  process.exit(1)
}

export function main(argv: string[]): number {
  const command = argv[0]
  const { values } = parseArgs({
    args: argv.slice(1),
    options: {
      terms: { type: 'string' },
      images: { type: 'string' },
      out: { type: 'string' },
      mode: { type: 'string', default: 'pooled' },
      model: { type: 'string' },
      dim: { type: 'string', default: String(DIM_DEFAULT) },
      'batch-size': { type: 'string', default: '32' },
    },
  })
  const dim = Number(values.dim)
  const batchSize = Number(values['batch-size'])
  if (!Number.isInteger(dim) || dim < 1 || !Number.isInteger(batchSize) || batchSize < 1) {
    usage()
  }

  if (command === 'extract-text') {
    if (!values.terms || !values.out) usage()
    if (values.mode !== 'pooled' && values.mode !== 'tokens') usage()
    const { terms } = extractText({
      termsPath: values.terms,
      outPath: values.out,
      mode: values.mode,
      modelId: values.model ?? TEXT_MODEL_DEFAULT,
      dim,
      batchSize,
    })
    console.log(`wrote ${terms} ${values.mode} text records to ${values.out}`)
    return 0
  }
  if (command === 'extract-images') {
    if (!values.images || !values.out) usage()
    const { images } = extractImages({
      imagesDir: values.images,
      outPath: values.out,
      modelId: values.model ?? IMAGE_MODEL_DEFAULT,
      dim,
      batchSize,
    })
    console.log(`wrote ${images} image records to ${values.out}`)
    return 0
  }
  usage()
}

const isDirectRun = process.argv[1] !== undefined &&
  import.meta.url.endsWith(process.argv[1].split('/').pop() as string)
if (isDirectRun) {
  try {
    process.exit(main(process.argv.slice(2)))
  } catch (err) {
    if (err instanceof EncodingError || err instanceof DecodeError ||
        err instanceof ModelLoadError) {
      console.error(`error: ${err.message}`)
      process.exit(1)
    }
    console.error(`runtime error: ${(err as Error).message}`)
    process.exit(2)
  }
}
