"""Loading, validation, and writing of precomputed term/image embeddings.

The interchange format is JSONL: one object per line, either
`{"key": k, "kind": "text"|"image", "vector": [...]}` or, for raw token
matrices, `{"key": k, "kind": "text", "tokens": [[...], ...]}`. Values are
decimal with 17 significant digits so float64 payloads round-trip exactly.
Lines starting with '#' are header comments and are skipped.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, NonFiniteError, ParseError

KINDS = ("text", "image")


def _norm(key: str) -> str:
    return unicodedata.normalize("NFC", key)


@dataclass
class EmbeddingTable:
    """Fixed-dimension embedding store, immutable by convention after load.

    Text entries are either a pooled 1-D vector or a 2-D token matrix with
    one row per token; image entries are 1-D vectors.
    """

    text_dim: int | None = None
    image_dim: int | None = None
    text: dict[str, np.ndarray] = field(default_factory=dict)
    images: dict[str, np.ndarray] = field(default_factory=dict)

    def lookup(self, key: str, kind: str):
        """Return the stored value, or None when the key is absent.

        Absence is a signal, not an error: inference falls back to a
        text-only path when an image embedding is missing.
        """
        if kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        store = self.text if kind == "text" else self.images
        return store.get(_norm(key))

    def update(self, fragment: "EmbeddingTable") -> "EmbeddingTable":
        """Merge another table in; dimensions must agree where both are set."""
        for attr, dim in (("text_dim", fragment.text_dim), ("image_dim", fragment.image_dim)):
            if dim is not None:
                mine = getattr(self, attr)
                if mine is not None and mine != dim:
                    raise DimensionMismatchError(f"{attr} conflict: {mine} vs {dim}")
                setattr(self, attr, dim)
        self.text.update(fragment.text)
        self.images.update(fragment.images)
        return self


def _entry_dim(value: np.ndarray) -> int:
    return value.shape[-1]


def load_embeddings(path, kind: str) -> tuple[EmbeddingTable, int]:
    """Load one kind of embeddings from JSONL.

    Returns (table fragment, duplicate-key count). The dimension is inferred
    from the first record and enforced afterwards; duplicate keys keep the
    last record and bump the warning count. Raises ParseError,
    DimensionMismatchError, or NonFiniteError with the 1-based line number.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    table = EmbeddingTable()
    duplicates = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line=lineno) from exc
            if not isinstance(rec, dict) or "key" not in rec or "kind" not in rec:
                raise ParseError("record must be an object with 'key' and 'kind'", line=lineno)
            if rec["kind"] != kind:
                raise ParseError(f"expected kind {kind!r}, got {rec['kind']!r}", line=lineno)
            key = _norm(str(rec["key"]))
            if "tokens" in rec:
                if kind != "text":
                    raise ParseError("token matrices are only valid for kind 'text'", line=lineno)
                value = np.asarray(rec["tokens"], dtype=np.float64)
                if value.ndim != 2 or value.shape[0] == 0:
                    raise ParseError("'tokens' must be a non-empty list of rows", line=lineno)
            elif "vector" in rec:
                value = np.asarray(rec["vector"], dtype=np.float64)
                if value.ndim != 1 or value.shape[0] == 0:
                    raise ParseError("'vector' must be a non-empty flat list", line=lineno)
            else:
                raise ParseError("record needs a 'vector' or 'tokens' field", line=lineno)
            if not np.all(np.isfinite(value)):
                raise NonFiniteError(f"line {lineno}: non-finite component in {key!r}")
            dim_attr = "text_dim" if kind == "text" else "image_dim"
            known = getattr(table, dim_attr)
            if known is None:
                setattr(table, dim_attr, _entry_dim(value))
            elif _entry_dim(value) != known:
                raise DimensionMismatchError(
                    f"dimension {_entry_dim(value)} != established {known}", line=lineno
                )
            store = table.text if kind == "text" else table.images
            if key in store:
                duplicates += 1
            store[key] = value
    return table, duplicates


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_embeddings(path, kind: str, entries, header: str | None = None) -> None:
    """Write (key, value) pairs as JSONL in iteration order.

    `value` may be a 1-D vector or, for text, a 2-D token matrix. An optional
    header string is emitted as a '#' comment on the first line.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(f"# {header}\n")
        for key, value in entries:
            value = np.asarray(value, dtype=np.float64)
            key_json = json.dumps(_norm(str(key)), ensure_ascii=False)
            if value.ndim == 2:
                body = "[" + ",".join(
                    "[" + ",".join(_fmt(x) for x in row) + "]" for row in value
                ) + "]"
                fh.write(f'{{"key": {key_json}, "kind": "{kind}", "tokens": {body}}}\n')
            else:
                body = "[" + ",".join(_fmt(x) for x in value) + "]"
                fh.write(f'{{"key": {key_json}, "kind": "{kind}", "vector": {body}}}\n')
