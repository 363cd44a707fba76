"""Trainable shallow heads over frozen backbone embeddings.

Two affine encoders map raw text/image embeddings into a shared dimension d
(text entries given as token matrices are mean-pooled first), and two affine
projectors map d-vectors into a d_z-dimensional latent plus one extra output
component read as an uncertainty scalar.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .numerics import affine_forward, affine_forward_batch, as_f64, sigmoid

SIDES = ("text", "vis")


@dataclass
class HeadParams:
    f_text_w: np.ndarray  # (d, text_dim)
    f_text_b: np.ndarray  # (d,)
    f_vis_w: np.ndarray   # (d, image_dim)
    f_vis_b: np.ndarray
    g_text_w: np.ndarray  # (d_z + 1, d)
    g_text_b: np.ndarray
    g_vis_w: np.ndarray   # (d_z + 1, d)
    g_vis_b: np.ndarray

    @property
    def d(self) -> int:
        return self.f_text_w.shape[0]

    @property
    def d_z(self) -> int:
        return self.g_text_w.shape[0] - 1

    @property
    def text_dim(self) -> int:
        return self.f_text_w.shape[1]

    @property
    def image_dim(self) -> int:
        return self.f_vis_w.shape[1]


def init_heads(text_dim: int, image_dim: int, d: int, d_z: int, rng,
               scale: float | None = None) -> HeadParams:
    """Seeded uniform initialization; biases start at zero."""

    def mat(rows, cols):
        s = scale if scale is not None else 1.0 / np.sqrt(cols)
        return rng.uniform(-s, s, size=(rows, cols))

    return HeadParams(
        f_text_w=mat(d, text_dim), f_text_b=np.zeros(d),
        f_vis_w=mat(d, image_dim), f_vis_b=np.zeros(d),
        g_text_w=mat(d_z + 1, d), g_text_b=np.zeros(d_z + 1),
        g_vis_w=mat(d_z + 1, d), g_vis_b=np.zeros(d_z + 1),
    )


def pool_tokens(entry) -> np.ndarray:
    """Mean-pool a token matrix to a single vector; 1-D input passes through."""
    entry = as_f64(entry)
    if entry.ndim == 2:
        return entry.mean(axis=0)
    if entry.ndim == 1:
        return entry
    raise ShapeError(f"text entry must be 1-D or 2-D, got ndim={entry.ndim}")


def encode_text_term(heads: HeadParams, entry) -> np.ndarray:
    """Term-level text representation: mean pooling (if needed) then f_text."""
    pooled = pool_tokens(entry)
    if pooled.shape[0] != heads.text_dim:
        raise ShapeError(f"text entry dim {pooled.shape[0]} != {heads.text_dim}")
    return affine_forward(heads.f_text_w, heads.f_text_b, pooled)


def encode_text_batch(heads: HeadParams, pooled: np.ndarray) -> np.ndarray:
    return affine_forward_batch(heads.f_text_w, heads.f_text_b, pooled)


def encode_image(heads: HeadParams, img_vec) -> np.ndarray:
    """Visual feature v = f_vis(image embedding)."""
    img_vec = as_f64(img_vec)
    if img_vec.shape != (heads.image_dim,):
        raise ShapeError(f"image entry dim {img_vec.shape} != ({heads.image_dim},)")
    return affine_forward(heads.f_vis_w, heads.f_vis_b, img_vec)


def encode_image_batch(heads: HeadParams, imgs: np.ndarray) -> np.ndarray:
    return affine_forward_batch(heads.f_vis_w, heads.f_vis_b, imgs)


def _proj_params(heads: HeadParams, side: str):
    if side == "text":
        return heads.g_text_w, heads.g_text_b
    if side == "vis":
        return heads.g_vis_w, heads.g_vis_b
    raise ValueError(f"side must be one of {SIDES}, got {side!r}")


def project_with_uncertainty(heads: HeadParams, x: np.ndarray, side: str):
    """Project into the shared latent space, splitting off the last component.

    Returns (z, u): z is the first d_z components of the affine output, u the
    final component, interpreted as the projection's uncertainty.
    """
    w, b = _proj_params(heads, side)
    y = affine_forward(w, b, as_f64(x))
    return y[:-1], float(y[-1])


def project_batch(heads: HeadParams, x: np.ndarray, side: str):
    """Batched projection; returns (Z, u) with Z (n, d_z) and u (n,)."""
    w, b = _proj_params(heads, side)
    y = affine_forward_batch(w, b, x)
    return y[:, :-1], y[:, -1]


def uncertainty_scale(u: float) -> float:
    """Squash a raw uncertainty into (0, 1) with the logistic function."""
    return float(sigmoid(float(u)))
