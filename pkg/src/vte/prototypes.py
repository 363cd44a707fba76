"""Vector-quantized prototype codebook.

Visual features are assigned to their nearest codebook row by Euclidean
distance (ties break to the lowest index). The codebook is never touched by
gradients: downstream consumers see the straight-through value, whose
backward routes entirely into the visual feature, and the rows themselves
move by an exponential moving average toward the mean of assigned features.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .numerics import as_f64


@dataclass
class PrototypeTable:
    rows: np.ndarray        # (k, e)
    ema_alpha: float = 0.999
    ema_eps: float = 0.001

    @property
    def k(self) -> int:
        return self.rows.shape[0]

    @property
    def e(self) -> int:
        return self.rows.shape[1]


def init_prototypes(k: int, e: int, rng, ema_alpha: float = 0.999,
                    ema_eps: float = 0.001) -> PrototypeTable:
    """Rows drawn uniform on [-1/sqrt(e), 1/sqrt(e)], seeded."""
    if k < 2:
        raise ValueError("codebook needs at least two prototypes")
    bound = 1.0 / np.sqrt(e)
    rows = rng.uniform(-bound, bound, size=(k, e))
    return PrototypeTable(rows=rows, ema_alpha=ema_alpha, ema_eps=ema_eps)


def squared_distances(feats: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances (m, k), accumulated coordinate by
    coordinate in fixed left-to-right order. That order is the tie contract:
    any equally-ordered accumulation (including a plain scalar loop) produces
    bit-identical sums, so argmin ties are reproducible across implementations.
    """
    m, k = feats.shape[0], rows.shape[0]
    d2 = np.zeros((m, k))
    for j in range(feats.shape[1]):
        diff = feats[:, j, None] - rows[None, :, j]
        d2 += diff * diff
    return d2


def assign(table: PrototypeTable, v) -> tuple[int, np.ndarray]:
    """Nearest prototype of a single feature: (index, row copy).

    Distance is Euclidean on the raw, unnormalized vectors; argmin ties break
    to the lowest index.
    """
    v = as_f64(v)
    if v.shape != (table.e,):
        raise ShapeError(f"feature shape {v.shape} != ({table.e},)")
    d2 = squared_distances(v[None, :], table.rows)[0]
    idx = int(np.argmin(d2))
    return idx, table.rows[idx].copy()


def assign_batch(table: PrototypeTable, feats: np.ndarray) -> np.ndarray:
    """Row-wise nearest-prototype indices for a feature matrix."""
    if feats.ndim != 2 or feats.shape[1] != table.e:
        raise ShapeError(f"feature matrix shape {feats.shape} incompatible with e={table.e}")
    if feats.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    return np.argmin(squared_distances(feats, table.rows), axis=1)


def straight_through(v: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Quantization with stop-gradient: forward is exactly p.

    Backward contract (honored by the hand-written training backward): the
    gradient arriving here flows to v unchanged; none reaches the codebook.
    """
    v, p = as_f64(v), as_f64(p)
    if v.shape != p.shape:
        raise ShapeError(f"shapes differ: {v.shape} vs {p.shape}")
    return p.copy()


@dataclass
class AssignmentBatch:
    """Features and their chosen prototype indices for one EMA step."""

    features: np.ndarray   # (m, e)
    indices: np.ndarray    # (m,)

    def counts(self, k: int) -> np.ndarray:
        return np.bincount(self.indices, minlength=k)


def ema_update(table: PrototypeTable, batch: AssignmentBatch) -> PrototypeTable:
    """Move each selected prototype toward the mean of its assigned features.

    P_i <- alpha * P_i + (1 - alpha) * sum(v_j) / (count_i + eps); prototypes
    with no assignments this batch are left untouched. Mutates in place.
    """
    if batch.features.shape[0] == 0:
        return table
    if batch.features.shape[1] != table.e:
        raise ShapeError("assignment features do not match prototype dimension")
    if np.any(batch.indices < 0) or np.any(batch.indices >= table.k):
        raise ShapeError("assignment index out of range")
    counts = batch.counts(table.k).astype(np.float64)
    sums = np.zeros_like(table.rows)
    np.add.at(sums, batch.indices, batch.features)
    active = counts >= 1.0
    targets = sums[active] / (counts[active] + table.ema_eps)[:, None]
    table.rows[active] = table.ema_alpha * table.rows[active] + (1.0 - table.ema_alpha) * targets
    return table


def dump_clusters(table: PrototypeTable, instances) -> dict[int, list[str]]:
    """Group instance keys by assigned prototype index.

    `instances` is an iterable of (key, feature). Clusters are returned in
    ascending index order; keys keep their input order within a cluster.
    """
    out: dict[int, list[str]] = {}
    for key, feat in instances:
        idx, _ = assign(table, feat)
        out.setdefault(idx, []).append(key)
    return {idx: out[idx] for idx in sorted(out)}
