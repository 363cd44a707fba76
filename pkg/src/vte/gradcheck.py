"""Full-model gradient verification against the central-difference oracle.

Builds a small random model and batch, captures the quantization state from
one forward pass, and finite-differences the frozen loss with respect to each
trainable tensor in turn. The analytic backward must match every tensor to a
small relative error; the codebook must receive exactly zero.
"""

from __future__ import annotations

import numpy as np

from .config import TrainConfig
from .model import ModelParams, init_model
from .numerics import finite_diff_grad, relative_grad_error
from .objectives import TaskBatch, total_loss


def random_batch(rng, n_pos: int, text_dim: int, image_dim: int,
                 images_everywhere: bool = False) -> TaskBatch:
    """A mixed batch: all contrastive pairs carry images, detection adds the
    same positives plus negatives of which only some carry images."""
    n_neg = n_pos
    hyper = rng.standard_normal((n_pos, text_dim))
    hypo = rng.standard_normal((n_pos, text_dim))
    images = rng.standard_normal((n_pos, image_dim))
    det_hyper = np.vstack([hyper, rng.standard_normal((n_neg, text_dim))])
    det_hypo = np.vstack([hypo, rng.standard_normal((n_neg, text_dim))])
    if images_everywhere:
        det_rows = np.arange(n_pos + n_neg, dtype=np.int64)
    else:
        det_rows = np.concatenate([
            np.arange(n_pos, dtype=np.int64),
            n_pos + np.flatnonzero(rng.random(n_neg) < 0.5).astype(np.int64),
        ])
    det_images = rng.standard_normal((det_rows.size, image_dim))
    labels = np.concatenate([np.ones(n_pos), np.zeros(n_neg)])
    return TaskBatch(
        hyper_text=hyper, hypo_text=hypo,
        images=images, image_rows=np.arange(n_pos, dtype=np.int64),
        det_hyper_text=det_hyper, det_hypo_text=det_hypo,
        det_images=det_images, det_image_rows=det_rows,
        labels=labels,
    )


def random_model(rng, text_dim: int, image_dim: int, d: int, d_z: int, k: int,
                 detector_hidden: int = 0) -> ModelParams:
    config = TrainConfig(d=d, d_z=d_z, k=k, batch_size=8,
                         detector_hidden=detector_hidden).validate()
    model = init_model(config, text_dim, image_dim, rng)
    # the trainer's detector starts at zero; the oracle wants generic weights
    for name, arr in model.trainable_tensors().items():
        if name.startswith("detector."):
            arr[...] = 0.2 * rng.standard_normal(arr.shape)
    return model


def run_grad_check(seed: int = 0, n_pos: int = 8, d: int = 16, d_z: int = 8, k: int = 8,
                   text_dim: int = 10, image_dim: int = 9, h: float = 1e-5,
                   detector_hidden: int = 0, tau_text: float = 0.1,
                   tau_proto: float = 0.1) -> dict[str, float]:
    """Return the per-tensor relative error between analytic and numeric
    gradients of the total objective, plus the max |gradient| reaching the
    codebook under the key 'prototypes.p'."""
    rng = np.random.default_rng(seed)
    model = random_model(rng, text_dim, image_dim, d, d_z, k,
                         detector_hidden=detector_hidden)
    batch = random_batch(rng, n_pos, text_dim, image_dim)

    base = total_loss(model, batch, tau_text=tau_text, tau_proto=tau_proto)
    frozen = base.quant
    tensors = model.trainable_tensors()

    report: dict[str, float] = {}
    for name, arr in tensors.items():
        original = arr.copy()

        def frozen_loss(flat, _arr=arr, _orig=original):
            _arr[...] = flat.reshape(_orig.shape)
            value = total_loss(model, batch, tau_text=tau_text, tau_proto=tau_proto,
                               frozen=frozen, with_grads=False).losses.total
            _arr[...] = _orig
            return value

        numeric = finite_diff_grad(frozen_loss, original.ravel(), h=h)
        report[name] = relative_grad_error(base.grads[name].ravel(), numeric)

    # the straight-through contract: the frozen loss never reads the codebook
    rows = model.prototypes.rows
    original = rows.copy()

    def codebook_loss(flat):
        rows[...] = flat.reshape(original.shape)
        value = total_loss(model, batch, tau_text=tau_text, tau_proto=tau_proto,
                           frozen=frozen, with_grads=False).losses.total
        rows[...] = original
        return value

    numeric = finite_diff_grad(codebook_loss, original.ravel(), h=h)
    report["prototypes.p"] = float(np.max(np.abs(numeric))) if numeric.size else 0.0
    return report
