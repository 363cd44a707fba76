"""Negative sampling, batch assembly, and the joint training loop.

A batch is a chunk of shuffled positive pairs: the contrastive tasks draw
their in-batch negatives from those positives only, while the detection task
additionally sees sampled negatives (children of the anchor hypernym with the
direction inverted, siblings of it, and random pool items that are neither
its ancestors nor descendants). Each step runs one analytic backward pass,
one optimizer step, and one EMA codebook update, in that order, so the whole
run is a deterministic function of (seed, config, data).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import TrainConfig
from .embeddings import EmbeddingTable
from .errors import (
    MissingTextEmbeddingError,
    NoNegativeAvailableError,
    NonFiniteLossError,
    UnknownTermError,
)
from .heads import pool_tokens
from .model import ModelParams, init_model, load_checkpoint, save_checkpoint  # noqa: F401
from .numerics import OptimizerState, adamw_step
from .objectives import TaskBatch, total_loss
from .prototypes import AssignmentBatch, ema_update
from .taxonomy import Taxonomy

NEGATIVE_TYPES = ("child", "sibling", "random")


@dataclass
class TrainingPair:
    hyper: str
    hypo: str
    image_key: str | None = None
    label: int = 1
    tag: str = "positive"

    def __post_init__(self):
        if (self.tag == "positive") != (self.label == 1):
            raise ValueError("label must be 1 exactly for tag 'positive'")


def sample_negatives(anchor: TrainingPair, taxonomy: Taxonomy, random_pool,
                     rng, ratio: int = 1, image_keys=None) -> list[TrainingPair]:
    """Draw `ratio` labeled negatives for one positive pair.

    The draw picks uniformly among the non-empty pools, so empty types fall
    back to the remaining ones; when every pool is empty the anchor has no
    negative and NoNegativeAvailableError is raised. Child negatives invert
    the edge direction (the candidate hypernym is a child of the anchor
    node); random negatives exclude the anchor's ancestors and descendants.
    """
    node = anchor.hyper
    if node not in taxonomy:
        raise UnknownTermError(f"anchor hypernym {node!r} not in taxonomy")
    image_keys = image_keys or {}
    children = sorted(taxonomy.children(node))
    siblings = sorted(taxonomy.siblings(node))
    excluded = taxonomy.ancestors(node) | taxonomy.descendants(node) | {node}
    pool = sorted(t for t in set(random_pool) if t not in excluded)

    pools = {"child": children, "sibling": siblings, "random": pool}
    available = [t for t in NEGATIVE_TYPES if pools[t]]
    if not available:
        raise NoNegativeAvailableError(f"no negative candidates for anchor {node!r}")

    out = []
    for _ in range(ratio):
        kind = available[int(rng.integers(len(available)))]
        term = pools[kind][int(rng.integers(len(pools[kind])))]
        if kind == "child":
            hyper, hypo = term, node
        else:
            hyper, hypo = node, term
        out.append(TrainingPair(hyper=hyper, hypo=hypo,
                                image_key=image_keys.get(hypo),
                                label=0, tag=kind))
    return out


def _pooled_text(table: EmbeddingTable, term: str) -> np.ndarray:
    entry = table.lookup(term, "text")
    if entry is None:
        raise MissingTextEmbeddingError(f"no text embedding for {term!r}")
    return pool_tokens(entry)


def build_task_batch(positives, negatives, table: EmbeddingTable) -> TaskBatch:
    """Assemble the numeric batch from pair lists and the embedding table."""
    hyper = np.stack([_pooled_text(table, p.hyper) for p in positives])
    hypo = np.stack([_pooled_text(table, p.hypo) for p in positives])

    img_vecs, img_rows = [], []
    for i, p in enumerate(positives):
        if p.image_key is not None:
            vec = table.lookup(p.image_key, "image")
            if vec is not None:
                img_vecs.append(vec)
                img_rows.append(i)

    det = list(positives) + list(negatives)
    det_hyper = np.stack([_pooled_text(table, p.hyper) for p in det])
    det_hypo = np.stack([_pooled_text(table, p.hypo) for p in det])
    det_img_vecs, det_img_rows = [], []
    for i, p in enumerate(det):
        if p.image_key is not None:
            vec = table.lookup(p.image_key, "image")
            if vec is not None:
                det_img_vecs.append(vec)
                det_img_rows.append(i)

    image_dim = table.image_dim or 0
    return TaskBatch(
        hyper_text=hyper,
        hypo_text=hypo,
        images=np.stack(img_vecs) if img_vecs else np.zeros((0, image_dim)),
        image_rows=np.asarray(img_rows, dtype=np.int64),
        det_hyper_text=det_hyper,
        det_hypo_text=det_hypo,
        det_images=np.stack(det_img_vecs) if det_img_vecs else np.zeros((0, image_dim)),
        det_image_rows=np.asarray(det_img_rows, dtype=np.int64),
        labels=np.asarray([p.label for p in det], dtype=np.float64),
    )


def train(config: TrainConfig, taxonomy: Taxonomy, table: EmbeddingTable,
          positives, head_scale: float | None = None):
    """Run the joint objective over shuffled positives for config.epochs.

    Returns (model, log) where log is one dict of mean loss components per
    epoch. With epochs=0 the returned model is exactly the seeded
    initialization.
    """
    config.validate()
    positives = list(positives)
    if not positives:
        raise ValueError("need at least one positive pair")
    for pair in positives:
        _pooled_text(table, pair.hyper)
        _pooled_text(table, pair.hypo)

    text_dim = table.text_dim
    image_dim = table.image_dim if table.image_dim is not None else 1
    rng = np.random.default_rng(config.seed)
    model = init_model(config, text_dim, image_dim, rng, head_scale=head_scale)
    opt = OptimizerState.for_params(
        model.trainable_tensors(), lr=config.lr, weight_decay=config.weight_decay,
        optimizer=config.optimizer,
    )

    image_keys = {p.hypo: p.image_key for p in positives if p.image_key is not None}
    random_pool = sorted({p.hypo for p in positives})

    log = []
    batch_counter = 0
    for epoch in range(config.epochs):
        order = rng.permutation(len(positives))
        sums = {"text": 0.0, "proto": 0.0, "hpc": 0.0, "bce": 0.0}
        n_batches = 0
        for start in range(0, len(positives), config.batch_size):
            chunk = [positives[i] for i in order[start:start + config.batch_size]]
            if len(chunk) < 2:
                continue  # a trailing singleton cannot form a contrastive batch
            negatives = []
            for pair in chunk:
                negatives.extend(sample_negatives(
                    pair, taxonomy, random_pool, rng,
                    ratio=config.negative_ratio, image_keys=image_keys,
                ))
            batch = build_task_batch(chunk, negatives, table)
            result = total_loss(model, batch, tau_text=config.tau_text,
                                tau_proto=config.tau_proto)
            if not np.isfinite(result.losses.total):
                raise NonFiniteLossError(
                    f"non-finite loss at epoch {epoch}, batch {batch_counter}",
                    batch_index=batch_counter,
                )
            adamw_step(model.trainable_tensors(), result.grads, opt)
            if result.pos_visual.shape[0] > 0:
                ema_update(model.prototypes, AssignmentBatch(
                    features=result.pos_visual, indices=result.quant.pos_indices))
            for key in sums:
                sums[key] += getattr(result.losses, key)
            n_batches += 1
            batch_counter += 1
        means = {key: (val / n_batches if n_batches else 0.0) for key, val in sums.items()}
        means["total"] = sum(means.values())
        means["epoch"] = epoch
        log.append(means)
    return model, log
