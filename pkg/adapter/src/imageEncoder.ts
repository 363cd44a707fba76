/**
 * Frozen image encoder.
 *
 * Decodes PNG or JPEG bytes, average-pools the RGB plane onto a fixed 8x8
 * grid (so any input resolution maps to the same 192 raw activations), and
 * applies a seeded Gaussian projection derived from the model id. Output is
 * a pure function of (model id, image bytes): the same picture under two
 * keys yields identical vectors.
 */

import { PNG } from 'pngjs'
import jpeg from 'jpeg-js'

import { DecodeError } from './errors.js'
import { gaussianVector } from './rng.js'

export interface ImageEncoderOptions {
  modelId: string
  dim: number
}

export const GRID = 8
export const PREPROCESS_POLICY =
  `average-pool RGB to ${GRID}x${GRID}, scale to [0,1], center at 0.5, seeded projection`

interface DecodedImage {
  width: number
  height: number
  data: Uint8Array // RGBA
}

function decodeImage(bytes: Buffer, key: string): DecodedImage {
  if (bytes.length >= 8 && bytes[0] === 0x89 && bytes[1] === 0x50) {
    try {
      const png = PNG.sync.read(bytes)
      return { width: png.width, height: png.height, data: png.data }
    } catch (err) {
      throw new DecodeError(`invalid PNG: ${(err as Error).message}`, key)
    }
  }
  if (bytes.length >= 2 && bytes[0] === 0xff && bytes[1] === 0xd8) {
    try {
      const image = jpeg.decode(bytes, { useTArray: true, maxMemoryUsageInMB: 64 })
      return { width: image.width, height: image.height, data: image.data }
    } catch (err) {
      throw new DecodeError(`invalid JPEG: ${(err as Error).message}`, key)
    }
  }
  throw new DecodeError('unrecognized image format (need PNG or JPEG)', key)
}

/** Average-pool the RGB channels onto a GRID x GRID patch grid in [0, 1]. */
function pooledGrid(image: DecodedImage): Float64Array {
  const out = new Float64Array(GRID * GRID * 3)
  const counts = new Float64Array(GRID * GRID)
  for (let y = 0; y < image.height; y++) {
    const gy = Math.min(GRID - 1, Math.floor((y * GRID) / image.height))
    for (let x = 0; x < image.width; x++) {
      const gx = Math.min(GRID - 1, Math.floor((x * GRID) / image.width))
      const cell = gy * GRID + gx
      const offset = (y * image.width + x) * 4
      out[cell * 3] += image.data[offset] / 255
      out[cell * 3 + 1] += image.data[offset + 1] / 255
      out[cell * 3 + 2] += image.data[offset + 2] / 255
      counts[cell] += 1
    }
  }
  for (let cell = 0; cell < GRID * GRID; cell++) {
    const n = counts[cell] || 1
    out[cell * 3] = out[cell * 3] / n - 0.5
    out[cell * 3 + 1] = out[cell * 3 + 1] / n - 0.5
    out[cell * 3 + 2] = out[cell * 3 + 2] / n - 0.5
  }
  return out
}

export class FrozenImageEncoder {
  constructor(readonly options: ImageEncoderOptions) {}

  encode(bytes: Buffer, key: string): Float64Array {
    const grid = pooledGrid(decodeImage(bytes, key))
    const { dim, modelId } = this.options
    const scale = 1 / Math.sqrt(grid.length)
    const out = new Float64Array(dim)
    for (let row = 0; row < dim; row++) {
      const weights = gaussianVector(`${modelId}:proj:${row}`, grid.length)
      let acc = 0
      for (let i = 0; i < grid.length; i++) acc += weights[i] * grid[i]
      out[row] = acc * scale
    }
    return out
  }
}
