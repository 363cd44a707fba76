export class ModelLoadError extends Error {}

export class EncodingError extends Error {
  constructor(message: string, readonly line?: number) {
    super(line === undefined ? message : `line ${line}: ${message}`)
  }
}

export class DecodeError extends Error {
  constructor(message: string, readonly key: string) {
    super(`${key}: ${message}`)
  }
}
