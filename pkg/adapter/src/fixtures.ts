/**
 * Deterministic fixture images, generated rather than checked in: five small
 * pictures with distinct patterns (four PNG, one JPEG).
 */

import { writeFileSync, mkdirSync } from 'fs'
import { join } from 'path'

import { PNG } from 'pngjs'
import jpeg from 'jpeg-js'

function pattern(width: number, height: number,
                 rgb: (x: number, y: number) => [number, number, number]): Buffer {
  const data = Buffer.alloc(width * height * 4)
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const offset = (y * width + x) * 4
      const [r, g, b] = rgb(x, y)
      data[offset] = r
      data[offset + 1] = g
      data[offset + 2] = b
      data[offset + 3] = 255
    }
  }
  return data
}

function pngBytes(width: number, height: number, data: Buffer): Buffer {
  const png = new PNG({ width, height })
  data.copy(png.data)
  return PNG.sync.write(png)
}

export function writeFixtureImages(dir: string): string[] {
  mkdirSync(dir, { recursive: true })
  const files: [string, Buffer][] = [
    ['gradient.png', pngBytes(24, 24, pattern(24, 24, (x, y) => [x * 10, y * 10, 128]))],
    ['checker.png', pngBytes(16, 16, pattern(16, 16, (x, y) =>
      ((x >> 2) + (y >> 2)) % 2 ? [230, 230, 230] : [25, 25, 25]))],
    ['stripes.png', pngBytes(20, 12, pattern(20, 12, x =>
      x % 4 < 2 ? [200, 40, 40] : [40, 40, 200]))],
    ['rings.png', pngBytes(32, 32, pattern(32, 32, (x, y) => {
      const r = Math.hypot(x - 16, y - 16)
      return r % 8 < 4 ? [250, 210, 60] : [60, 120, 60]
    }))],
    ['photo.jpg', jpeg.encode({
      width: 24, height: 24,
      data: pattern(24, 24, (x, y) => [y * 8, 255 - x * 8, (x + y) * 5]),
    }, 90).data as Buffer],
  ]
  for (const [name, bytes] of files) {
    writeFileSync(join(dir, name), bytes)
  }
  return files.map(([name]) => name)
}
