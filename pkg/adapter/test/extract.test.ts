import { execFileSync } from 'child_process'
import { mkdtempSync, readFileSync, writeFileSync } from 'fs'
import { tmpdir } from 'os'
import { dirname, join } from 'path'
import { fileURLToPath } from 'url'

import { describe, expect, it } from 'vitest'

import { main } from '../src/cli.js'
import { EncodingError } from '../src/errors.js'
import { extractImages, extractText } from '../src/extract.js'
import { writeFixtureImages } from '../src/fixtures.js'

const here = dirname(fileURLToPath(import.meta.url))
const packageRoot = join(here, '..')
const termsPath = join(packageRoot, 'fixtures', 'terms.txt')

const work = mkdtempSync(join(tmpdir(), 'adapter-extract-'))
const imagesDir = join(work, 'images')
writeFixtureImages(imagesDir)

function records(path: string): { key: string; vector?: number[]; tokens?: number[][] }[] {
  return readFileSync(path, 'utf-8')
    .split('\n')
    .filter(line => line.length > 0 && !line.startsWith('#'))
    .map(line => JSON.parse(line))
}

function textJob(outPath: string, mode: 'pooled' | 'tokens') {
  return {
    termsPath, outPath, mode,
    modelId: 'text-demo', dim: 64, batchSize: 4,
  }
}

describe('extractText', () => {
  it('writes one record per term with a policy header', () => {
    const out = join(work, 'pooled.jsonl')
    expect(extractText(textJob(out, 'pooled'))).toEqual({ terms: 10 })
    const header = readFileSync(out, 'utf-8').split('\n')[0]
    expect(header.startsWith('#')).toBe(true)
    expect(header).toContain('model=text-demo')
    expect(header).toContain('pooling=')
    const recs = records(out)
    expect(recs.length).toBe(10)
    expect(recs[0].key).toBe('fruit')
    expect(recs.every(r => r.vector!.length === 64)).toBe(true)
  })

  it('tokens mode emits matrices whose mean matches pooled mode', () => {
    const pooledPath = join(work, 'pooled2.jsonl')
    const tokensPath = join(work, 'tokens2.jsonl')
    extractText(textJob(pooledPath, 'pooled'))
    extractText(textJob(tokensPath, 'tokens'))
    const pooled = records(pooledPath)
    const tokens = records(tokensPath)
    for (let i = 0; i < pooled.length; i++) {
      const matrix = tokens[i].tokens!
      const vector = pooled[i].vector!
      expect(tokens[i].key).toBe(pooled[i].key)
      for (let d = 0; d < vector.length; d++) {
        const mean = matrix.reduce((acc, row) => acc + row[d], 0) / matrix.length
        expect(Math.abs(mean - vector[d])).toBeLessThan(1e-6)
      }
    }
    // multi-word terms produce one row per word
    const soup = tokens.find(r => r.key === 'beef noodle soup')!
    expect(soup.tokens!.length).toBe(3)
  })

  it('is byte-deterministic across runs', () => {
    const a = join(work, 'det-a.jsonl')
    const b = join(work, 'det-b.jsonl')
    extractText(textJob(a, 'tokens'))
    extractText(textJob(b, 'tokens'))
    expect(readFileSync(a, 'utf-8')).toBe(readFileSync(b, 'utf-8'))
  })

  it('rejects empty term lines with the line number', () => {
    const bad = join(work, 'bad-terms.txt')
    writeFileSync(bad, 'apple\n\npear\n')
    expect(() => extractText({ ...textJob(join(work, 'x.jsonl'), 'pooled'), termsPath: bad }))
      .toThrowError(EncodingError)
    try {
      extractText({ ...textJob(join(work, 'x.jsonl'), 'pooled'), termsPath: bad })
    } catch (err) {
      expect((err as EncodingError).line).toBe(2)
    }
  })
})

describe('extractImages', () => {
  it('writes one record per decodable file, keyed by basename, sorted', () => {
    const out = join(work, 'images.jsonl')
    expect(extractImages({
      imagesDir, outPath: out, modelId: 'img-demo', dim: 64, batchSize: 2,
    })).toEqual({ images: 5 })
    const recs = records(out)
    expect(recs.map(r => r.key)).toEqual(
      ['checker', 'gradient', 'photo', 'rings', 'stripes'])
    expect(recs.every(r => r.vector!.length === 64)).toBe(true)
  })
})

describe('engine interoperability', () => {
  it('the python engine loads every output with zero warnings', () => {
    const pooledPath = join(work, 'engine-pooled.jsonl')
    const tokensPath = join(work, 'engine-tokens.jsonl')
    const imagesPath = join(work, 'engine-images.jsonl')
    extractText(textJob(pooledPath, 'pooled'))
    extractText(textJob(tokensPath, 'tokens'))
    extractImages({ imagesDir, outPath: imagesPath, modelId: 'img-demo', dim: 64, batchSize: 32 })

    const script = [
      'import sys',
      'from vte import load_embeddings',
      'from vte.heads import pool_tokens',
      'import numpy as np',
      'pooled, a = load_embeddings(sys.argv[1], "text")',
      'tokens, b = load_embeddings(sys.argv[2], "text")',
      'images, c = load_embeddings(sys.argv[3], "image")',
      'assert a == b == c == 0, (a, b, c)',
      'assert pooled.text_dim == tokens.text_dim == images.image_dim == 64',
      'worst = max(float(np.max(np.abs(pool_tokens(tokens.text[k]) - v)))',
      '            for k, v in pooled.text.items())',
      'assert worst < 1e-6, worst',
      'print("ok", len(pooled.text), len(images.images), worst)',
    ].join('\n')
    const stdout = execFileSync(
      'python3', ['-c', script, pooledPath, tokensPath, imagesPath],
      { encoding: 'utf-8' },
    )
    expect(stdout).toContain('ok 10 5')
  })
})

describe('cli', () => {
  it('extract-text and extract-images run end to end', () => {
    const out = join(work, 'cli-text.jsonl')
    expect(main(['extract-text', '--terms', termsPath, '--out', out,
                 '--mode', 'tokens', '--dim', '32'])).toBe(0)
    expect(records(out).length).toBe(10)
    const outImages = join(work, 'cli-images.jsonl')
    expect(main(['extract-images', '--images', imagesDir, '--out', outImages])).toBe(0)
    expect(records(outImages).length).toBe(5)
  })
})

describe('repository fixture outputs', () => {
  it('regenerates adapter/out for the engine acceptance check', () => {
    const outDir = join(packageRoot, 'out')
    extractText({ termsPath, outPath: join(outDir, 'terms_pooled.jsonl'),
                  mode: 'pooled', modelId: 'text-demo', dim: 64, batchSize: 32 })
    extractText({ termsPath, outPath: join(outDir, 'terms_tokens.jsonl'),
                  mode: 'tokens', modelId: 'text-demo', dim: 64, batchSize: 32 })
    const fixtureImages = join(outDir, 'fixture_images')
    writeFixtureImages(fixtureImages)
    extractImages({ imagesDir: fixtureImages, outPath: join(outDir, 'images.jsonl'),
                    modelId: 'img-demo', dim: 64, batchSize: 32 })
    expect(records(join(outDir, 'terms_pooled.jsonl')).length).toBe(10)
    expect(records(join(outDir, 'images.jsonl')).length).toBe(5)
  })
})
