/**
 * Embedding JSONL records, matching the engine's interchange format exactly:
 * one object per line with "key", "kind", and either a flat "vector" or a
 * 2-D "tokens" matrix. Values carry 17 significant digits so every float64
 * survives the decimal round trip; '#' lines are header comments.
 */

function formatValue(x: number): string {
  if (!Number.isFinite(x)) {
    throw new Error(`non-finite embedding component ${x}`)
  }
  return x.toPrecision(17)
}

function formatRow(values: ArrayLike<number>): string {
  const parts: string[] = []
  for (let i = 0; i < values.length; i++) parts.push(formatValue(values[i]))
  return '[' + parts.join(',') + ']'
}

export function vectorRecord(key: string, kind: 'text' | 'image', values: ArrayLike<number>): string {
  return `{"key": ${JSON.stringify(key)}, "kind": "${kind}", "vector": ${formatRow(values)}}`
}

export function tokensRecord(key: string, rows: ArrayLike<number>[]): string {
  const body = '[' + rows.map(formatRow).join(',') + ']'
  return `{"key": ${JSON.stringify(key)}, "kind": "text", "tokens": ${body}}`
}

export function headerComment(fields: Record<string, string | number>): string {
  const parts = Object.entries(fields).map(([k, v]) => `${k}=${v}`)
  return '# ' + parts.join(' ')
}
