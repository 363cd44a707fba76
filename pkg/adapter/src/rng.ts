/**
 * Deterministic seeded randomness. Model weights here are pure functions of
 * the model id string, so an extraction is reproducible on any machine with
 * no downloaded artifacts.
 */

/** FNV-1a 32-bit hash of a string. */
export function fnv1a(text: string): number {
  let hash = 0x811c9dc5
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i)
    hash = Math.imul(hash, 0x01000193)
  }
  return hash >>> 0
}

/** Mulberry32: a small fast PRNG over a 32-bit state. */
export function mulberry32(seed: number): () => number {
  let state = seed >>> 0
  return () => {
    state = (state + 0x6d2b79f5) >>> 0
    let t = state
    t = Math.imul(t ^ (t >>> 15), t | 1)
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61)
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296
  }
}

/** Standard normal draws via Box-Muller over a seeded uniform stream. */
export function gaussianVector(seedText: string, dim: number): Float64Array {
  const uniform = mulberry32(fnv1a(seedText))
  const out = new Float64Array(dim)
  for (let i = 0; i < dim; i += 2) {
    let u = 0
    while (u === 0) u = uniform()
    const v = uniform()
    const radius = Math.sqrt(-2 * Math.log(u))
    out[i] = radius * Math.cos(2 * Math.PI * v)
    if (i + 1 < dim) out[i + 1] = radius * Math.sin(2 * Math.PI * v)
  }
  return out
}
