/**
 * Frozen hashed text encoder.
 *
 * Each whitespace token gets a vector: the mean of seeded Gaussian embeddings
 * of its character trigrams (word boundaries marked), plus a small seeded
 * positional component so token order matters. The per-token matrix plays
 * the role of a last hidden layer; term-level pooling is the plain mean over
 * token rows with no extra boundary tokens, and the same mean is what the
 * engine applies when it receives the token matrix instead.
 *
 * Everything is a pure function of (model id, text), so extractions are
 * bit-reproducible without any downloaded weights.
 */

import { gaussianVector } from './rng.js'

export interface TextEncoderOptions {
  modelId: string
  dim: number
}

export const POOLING_POLICY = 'mean over word tokens, no boundary tokens'

function characterTrigrams(word: string): string[] {
  const padded = `^${word}$`
  if (padded.length <= 3) return [padded]
  const grams: string[] = []
  for (let i = 0; i + 3 <= padded.length; i++) {
    grams.push(padded.slice(i, i + 3))
  }
  return grams
}

export function tokenize(term: string): string[] {
  return term.split(/\s+/).filter(token => token.length > 0)
}

export class HashedTextEncoder {
  constructor(readonly options: TextEncoderOptions) {}

  private embed(seedText: string): Float64Array {
    return gaussianVector(`${this.options.modelId}:${seedText}`, this.options.dim)
  }

  /** Per-token matrix for one term (rows in token order). */
  encodeTokens(term: string): Float64Array[] {
    const tokens = tokenize(term)
    const { dim } = this.options
    return tokens.map((token, position) => {
      const grams = characterTrigrams(token.toLowerCase())
      const row = new Float64Array(dim)
      for (const gram of grams) {
        const gramVec = this.embed(`gram:${gram}`)
        for (let i = 0; i < dim; i++) row[i] += gramVec[i]
      }
      for (let i = 0; i < dim; i++) row[i] /= grams.length
      const positional = this.embed(`pos:${position}`)
      for (let i = 0; i < dim; i++) row[i] += 0.1 * positional[i]
      return row
    })
  }

  /** Mean-pooled term vector; identical to the engine's pooling of encodeTokens. */
  encodePooled(term: string): Float64Array {
    const rows = this.encodeTokens(term)
    const pooled = new Float64Array(this.options.dim)
    for (const row of rows) {
      for (let i = 0; i < pooled.length; i++) pooled[i] += row[i]
    }
    for (let i = 0; i < pooled.length; i++) pooled[i] /= rows.length
    return pooled
  }
}
