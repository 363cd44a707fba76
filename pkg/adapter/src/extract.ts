/**
 * Extraction jobs: read a terms file or an images directory, run the frozen
 * encoders, and write embedding JSONL in input order. The first output line
 * is a header comment recording the model id and the preprocessing/pooling
 * policy, which downstream loaders skip.
 */

import { readFileSync, readdirSync, writeFileSync, mkdirSync } from 'fs'
import { basename, dirname, extname, join } from 'path'

import { EncodingError } from './errors.js'
import { FrozenImageEncoder } from './imageEncoder.js'
import { headerComment, tokensRecord, vectorRecord } from './jsonl.js'
import { HashedTextEncoder, POOLING_POLICY } from './textEncoder.js'
import { PREPROCESS_POLICY } from './imageEncoder.js'

export interface TextJob {
  termsPath: string
  outPath: string
  mode: 'pooled' | 'tokens'
  modelId: string
  dim: number
  batchSize: number
}

export interface ImageJob {
  imagesDir: string
  outPath: string
  modelId: string
  dim: number
  batchSize: number
}

export const TEXT_MODEL_DEFAULT = 'hashed-trigram-v1'
export const IMAGE_MODEL_DEFAULT = 'pooled-grid-projection-v1'
export const DIM_DEFAULT = 64

const IMAGE_EXTENSIONS = new Set(['.png', '.jpg', '.jpeg'])

function chunks<T>(items: T[], size: number): T[][] {
  const out: T[][] = []
  for (let i = 0; i < items.length; i += size) out.push(items.slice(i, i + size))
  return out
}

function writeLines(outPath: string, lines: string[]) {
  mkdirSync(dirname(outPath), { recursive: true })
  writeFileSync(outPath, lines.join('\n') + '\n', 'utf-8')
}

/** One term per line; blank or whitespace-only lines are an error. */
export function extractText(job: TextJob): { terms: number } {
  const encoder = new HashedTextEncoder({ modelId: job.modelId, dim: job.dim })
  const raw = readFileSync(job.termsPath, 'utf-8')
  const termLines = raw.split('\n')
  if (termLines.at(-1) === '') termLines.pop()

  const terms: { term: string; line: number }[] = termLines.map((term, i) => {
    if (term.trim().length === 0) {
      throw new EncodingError('empty term line', i + 1)
    }
    return { term: term.trim(), line: i + 1 }
  })

  const lines = [headerComment({
    model: job.modelId,
    mode: job.mode,
    dim: job.dim,
    pooling: JSON.stringify(POOLING_POLICY),
  })]
  for (const batch of chunks(terms, job.batchSize)) {
    for (const { term } of batch) {
      if (job.mode === 'tokens') {
        lines.push(tokensRecord(term, encoder.encodeTokens(term)))
      } else {
        lines.push(vectorRecord(term, 'text', encoder.encodePooled(term)))
      }
    }
  }
  writeLines(job.outPath, lines)
  return { terms: terms.length }
}

/** Every decodable file in the directory, keyed by file name without extension. */
export function extractImages(job: ImageJob): { images: number } {
  const encoder = new FrozenImageEncoder({ modelId: job.modelId, dim: job.dim })
  const files = readdirSync(job.imagesDir)
    .filter(name => IMAGE_EXTENSIONS.has(extname(name).toLowerCase()))
    .sort()

  const keys = new Set<string>()
  const lines = [headerComment({
    model: job.modelId,
    dim: job.dim,
    preprocess: JSON.stringify(PREPROCESS_POLICY),
  })]
  for (const batch of chunks(files, job.batchSize)) {
    for (const name of batch) {
      const key = basename(name, extname(name))
      if (keys.has(key)) {
        throw new EncodingError(`duplicate image key ${key}`)
      }
      keys.add(key)
      const bytes = readFileSync(join(job.imagesDir, name))
      lines.push(vectorRecord(key, 'image', encoder.encode(bytes, key)))
    }
  }
  writeLines(job.outPath, lines)
  return { images: files.length }
}
