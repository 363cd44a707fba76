"""Seeded synthetic multimodal taxonomy benchmark.

Each hypernym class owns one text centroid and one image centroid; hyponym
embeddings are their class centroid plus Gaussian noise. A confuser fraction
of hyponyms copies its text centroid from one class while drawing its image
centroid (and its gold parent) from a different class, so any text-only model
systematically mislabels exactly those items while the visual path can still
resolve them. The generator also provides the exhaustive nearest-neighbor
oracle used to cross-check codebook assignment.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
import json

import numpy as np

from .config import TrainConfig
from .embeddings import EmbeddingTable, write_embeddings
from .errors import ConfigError, ShapeError
from .expansion import Candidate, save_candidates
from .taxonomy import Taxonomy, save_edges
from .training import TrainingPair


@dataclass
class SynthConfig:
    num_hypernyms: int = 10
    hyponyms_per_hypernym: int = 20
    text_dim: int = 32
    image_dim: int = 32
    sigma_within: float = 0.2
    sigma_between: float = 1.0
    confuser_fraction: float = 0.2
    seed: int = 0

    def validate(self) -> "SynthConfig":
        if self.num_hypernyms < 2:
            raise ConfigError("need at least two hypernym classes")
        if self.hyponyms_per_hypernym < 1:
            raise ConfigError("need at least one hyponym per class")
        if self.text_dim < 1 or self.image_dim < 1:
            raise ConfigError("embedding dimensions must be positive")
        if not 0.0 <= self.confuser_fraction <= 1.0:
            raise ConfigError("confuser_fraction must lie in [0, 1]")
        if not 0.0 < self.sigma_within < self.sigma_between:
            raise ConfigError("need 0 < sigma_within < sigma_between")
        return self

    def to_dict(self) -> dict:
        return {
            "num_hypernyms": self.num_hypernyms,
            "hyponyms_per_hypernym": self.hyponyms_per_hypernym,
            "text_dim": self.text_dim,
            "image_dim": self.image_dim,
            "sigma_within": self.sigma_within,
            "sigma_between": self.sigma_between,
            "confuser_fraction": self.confuser_fraction,
            "seed": self.seed,
        }


@dataclass
class SynthDataset:
    taxonomy: Taxonomy
    table: EmbeddingTable
    positives: list
    eval_candidates: list
    eval_tags: list                 # "gold" | "sibling" | "trap", parallel to eval_candidates
    confusers: set
    config: SynthConfig
    text_centroids: np.ndarray = field(repr=False, default=None)
    image_centroids: np.ndarray = field(repr=False, default=None)
    item_image_class: dict = field(default_factory=dict)

    def trap_subset(self):
        """Eval records touching confusers: their gold edges plus their traps."""
        return [i for i, cand in enumerate(self.eval_candidates)
                if cand.hypo in self.confusers]


ROOT = "root"


def class_name(i: int) -> str:
    return f"class{i:02d}"


def _planted_centroids(rng, count: int, dim: int, scale: float) -> np.ndarray:
    """Class centroids with norm scale*sqrt(dim). When they fit, directions
    are orthogonalized so between-class separation does not depend on the
    luck of the draw; with more classes than dimensions they stay Gaussian."""
    raw = rng.standard_normal((dim, count))
    if count <= dim:
        q, _ = np.linalg.qr(raw)
        return scale * np.sqrt(dim) * q.T
    return scale * raw.T


def generate(config: SynthConfig) -> SynthDataset:
    """Build the full dataset deterministically from config.seed."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    n_cls = config.num_hypernyms
    per = config.hyponyms_per_hypernym
    n_conf = int(round(config.confuser_fraction * per))

    text_centroids = _planted_centroids(rng, n_cls, config.text_dim, config.sigma_between)
    image_centroids = _planted_centroids(rng, n_cls, config.image_dim, config.sigma_between)
    root_text = config.sigma_between * rng.standard_normal(config.text_dim)

    taxonomy = Taxonomy()
    table = EmbeddingTable(text_dim=config.text_dim, image_dim=config.image_dim)
    table.text[ROOT] = root_text
    for i in range(n_cls):
        taxonomy.add_edge(ROOT, class_name(i))
        table.text[class_name(i)] = text_centroids[i].copy()

    positives: list[TrainingPair] = []
    eval_candidates: list[Candidate] = []
    eval_tags: list[str] = []
    confusers: set[str] = set()
    item_image_class: dict[str, int] = {}

    for h in range(n_cls):
        for j in range(per):
            name = f"{class_name(h)}_item{j:02d}"
            is_confuser = j < n_conf
            if is_confuser:
                img_cls = int((h + 1 + rng.integers(n_cls - 1)) % n_cls)
                confusers.add(name)
            else:
                img_cls = h
            text_vec = text_centroids[h] + config.sigma_within * rng.standard_normal(config.text_dim)
            image_vec = image_centroids[img_cls] + config.sigma_within * rng.standard_normal(config.image_dim)
            table.text[name] = text_vec
            table.images[name] = image_vec
            item_image_class[name] = img_cls

            gold_parent = class_name(img_cls)
            taxonomy.add_edge(gold_parent, name)
            positives.append(TrainingPair(hyper=gold_parent, hypo=name,
                                          image_key=name, label=1))
            eval_candidates.append(Candidate(gold_parent, name, name, 1))
            eval_tags.append("gold")
            if is_confuser:
                # the text-side class is the trap: lexically right, semantically wrong
                eval_candidates.append(Candidate(class_name(h), name, name, 0))
                eval_tags.append("trap")
            else:
                wrong = int((h + 1 + rng.integers(n_cls - 1)) % n_cls)
                eval_candidates.append(Candidate(class_name(wrong), name, name, 0))
                eval_tags.append("sibling")

    return SynthDataset(
        taxonomy=taxonomy, table=table, positives=positives,
        eval_candidates=eval_candidates, eval_tags=eval_tags,
        confusers=confusers, config=config,
        text_centroids=text_centroids, image_centroids=image_centroids,
        item_image_class=item_image_class,
    )


def default_train_config(config: SynthConfig, **overrides) -> TrainConfig:
    """Desk-scale training settings paired with the generator defaults:
    a 32-prototype codebook matching the 32-dim heads, minimal batches so the
    small fixed learning rate accumulates enough optimizer steps over 200
    epochs, and a 4:1 negative ratio for the detection task."""
    base = dict(batch_size=2, k=32, d=config.image_dim, d_z=16, negative_ratio=4,
                epochs=200, lr=5e-5, tau_text=0.1, tau_proto=0.1, seed=config.seed)
    base.update(overrides)
    return TrainConfig(**base).validate()


def strip_images(dataset: SynthDataset) -> tuple[EmbeddingTable, list, list]:
    """Text-only ablation view: the same data with every image withheld."""
    table = EmbeddingTable(text_dim=dataset.table.text_dim,
                           image_dim=dataset.table.image_dim,
                           text=dict(dataset.table.text), images={})
    positives = [TrainingPair(hyper=p.hyper, hypo=p.hypo, image_key=None, label=1)
                 for p in dataset.positives]
    candidates = [Candidate(c.hyper, c.hypo, None, c.label)
                  for c in dataset.eval_candidates]
    return table, positives, candidates


def oracle_nearest(vectors: np.ndarray, codebook: np.ndarray) -> np.ndarray:
    """Exhaustive-scan nearest neighbor with the same tie rule as assignment:
    strictly smaller squared distance wins, so ties keep the lowest index.
    Distances accumulate coordinate by coordinate in scalar Python floats,
    matching the engine's fixed left-to-right summation order bit for bit."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    codebook = np.asarray(codebook, dtype=np.float64)
    if vectors.shape[1] != codebook.shape[1]:
        raise ShapeError(f"dims differ: {vectors.shape[1]} vs {codebook.shape[1]}")
    out = np.zeros(vectors.shape[0], dtype=np.int64)
    for i, vec in enumerate(vectors):
        best, best_d2 = 0, None
        for j, row in enumerate(codebook):
            d2 = 0.0
            for a, b in zip(vec.tolist(), row.tolist()):
                diff = a - b
                d2 += diff * diff
            if best_d2 is None or d2 < best_d2:
                best, best_d2 = j, d2
        out[i] = best
    return out


def write_dataset(dataset: SynthDataset, outdir) -> None:
    """Write the dataset in the engine's file formats; byte-identical per seed."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    save_edges(dataset.taxonomy, outdir / "taxonomy.tsv")
    write_embeddings(outdir / "text.jsonl", "text", dataset.table.text.items())
    write_embeddings(outdir / "images.jsonl", "image", dataset.table.images.items())
    save_candidates(
        [Candidate(p.hyper, p.hypo, p.image_key, p.label) for p in dataset.positives],
        outdir / "train.tsv",
    )
    save_candidates(dataset.eval_candidates, outdir / "eval.tsv")
    meta = {
        "config": dataset.config.to_dict(),
        "confusers": sorted(dataset.confusers),
        "eval_tags": dataset.eval_tags,
        "counts": {
            "positives": len(dataset.positives),
            "eval_positive": sum(1 for c in dataset.eval_candidates if c.label == 1),
            "eval_negative": sum(1 for c in dataset.eval_candidates if c.label == 0),
        },
    }
    with open(outdir / "meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, sort_keys=True, indent=2)
        fh.write("\n")
