import { describe, expect, it } from 'vitest'

import { HashedTextEncoder, tokenize } from '../src/textEncoder.js'

const encoder = new HashedTextEncoder({ modelId: 'test-model', dim: 16 })

describe('tokenize', () => {
  it('splits on whitespace and drops empties', () => {
    expect(tokenize('beef  noodle soup')).toEqual(['beef', 'noodle', 'soup'])
    expect(tokenize('  apple ')).toEqual(['apple'])
  })
})

describe('HashedTextEncoder', () => {
  it('is deterministic per (model, term)', () => {
    const a = encoder.encodePooled('apple juice')
    const b = encoder.encodePooled('apple juice')
    expect(Array.from(a)).toEqual(Array.from(b))
  })

  it('differs across model ids and terms', () => {
    const other = new HashedTextEncoder({ modelId: 'other-model', dim: 16 })
    expect(Array.from(other.encodePooled('apple'))).not.toEqual(
      Array.from(encoder.encodePooled('apple')))
    expect(Array.from(encoder.encodePooled('pear'))).not.toEqual(
      Array.from(encoder.encodePooled('apple')))
  })

  it('emits one token row per word, all finite, fixed dim', () => {
    const rows = encoder.encodeTokens('beef noodle soup')
    expect(rows.length).toBe(3)
    for (const row of rows) {
      expect(row.length).toBe(16)
      for (const x of row) expect(Number.isFinite(x)).toBe(true)
    }
  })

  it('token order matters (positional mixing)', () => {
    const ab = encoder.encodePooled('apple juice')
    const ba = encoder.encodePooled('juice apple')
    expect(Array.from(ab)).not.toEqual(Array.from(ba))
  })

  it('pooled mode equals the mean of the token rows', () => {
    const rows = encoder.encodeTokens('beef noodle soup')
    const pooled = encoder.encodePooled('beef noodle soup')
    for (let i = 0; i < pooled.length; i++) {
      const mean = (rows[0][i] + rows[1][i] + rows[2][i]) / 3
      expect(Math.abs(pooled[i] - mean)).toBeLessThan(1e-12)
    }
  })
})
