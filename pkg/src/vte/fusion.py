"""Similarity-gated fusion of text and visual representations, plus the
hypernymy detector head.

Each side of a candidate pair mixes its textual representation with a visual
one (the assigned prototype on the hypernym side, the instance feature on the
hyponym side), weighted by a gate: the sigmoid of the cosine similarity
between the side's projected text and visual vectors. When text and visual
semantics disagree the gate shrinks toward sigma(-1) and the pair falls back
toward its textual representation; a missing image is the limiting case with
both gates forced to 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MissingTextEmbeddingError, ShapeError, ZeroVectorError
from .heads import encode_image, encode_text_term, project_with_uncertainty
from .numerics import as_f64, sigmoid
from .prototypes import assign


@dataclass
class DetectorParams:
    """Affine map over (c_e || c_o || c_e * c_o), optionally through one
    tanh hidden layer (off by default)."""

    w: np.ndarray               # (3d,) or (hidden,) when the hidden layer is on
    b: np.ndarray               # (1,)
    threshold: float = 0.5
    hidden_w: np.ndarray | None = None   # (hidden, 3d)
    hidden_b: np.ndarray | None = None


def init_detector(d: int, threshold: float = 0.5, hidden: int = 0) -> DetectorParams:
    """Zero initialization: an untrained detector scores every pair at 0.5."""
    if hidden:
        return DetectorParams(
            w=np.zeros(hidden), b=np.zeros(1), threshold=threshold,
            hidden_w=np.zeros((hidden, 3 * d)), hidden_b=np.zeros(hidden),
        )
    return DetectorParams(w=np.zeros(3 * d), b=np.zeros(1), threshold=threshold)


@dataclass
class FusedPair:
    c_e: np.ndarray
    c_o: np.ndarray
    alpha_e: float
    alpha_o: float


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ZeroVectorError("cosine of a zero projected vector")
    return float(a @ b / (na * nb))


def gate_weights(z_e, z_p, z_o, z_v) -> tuple[float, float]:
    """Per-side gates sigma(cos(text projection, visual projection))."""
    alpha_e = float(sigmoid(_cosine(as_f64(z_e), as_f64(z_p))))
    alpha_o = float(sigmoid(_cosine(as_f64(z_o), as_f64(z_v))))
    return alpha_e, alpha_o


def fuse(t: np.ndarray, visual: np.ndarray, alpha: float) -> np.ndarray:
    """c = (1 - alpha) * t + alpha * visual."""
    t, visual = as_f64(t), as_f64(visual)
    if t.shape != visual.shape:
        raise ShapeError(f"cannot fuse shapes {t.shape} and {visual.shape}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"gate must lie in [0, 1], got {alpha}")
    return (1.0 - alpha) * t + alpha * visual


def detector_features(c_e: np.ndarray, c_o: np.ndarray) -> np.ndarray:
    if c_e.shape != c_o.shape:
        raise ShapeError(f"fused shapes differ: {c_e.shape} vs {c_o.shape}")
    return np.concatenate([c_e, c_o, c_e * c_o])


def detect(c_e, c_o, params: DetectorParams) -> tuple[float, float]:
    """Score a fused pair; returns (logit, probability)."""
    feats = detector_features(as_f64(c_e), as_f64(c_o))
    if params.hidden_w is not None:
        if params.hidden_w.shape[1] != feats.shape[0]:
            raise ShapeError("detector hidden layer does not match feature size")
        hidden = np.tanh(params.hidden_w @ feats + params.hidden_b)
        logit = float(params.w @ hidden + params.b[0])
    else:
        if params.w.shape != feats.shape:
            raise ShapeError(f"detector weight shape {params.w.shape} != {feats.shape}")
        logit = float(params.w @ feats + params.b[0])
    return logit, float(sigmoid(logit))


def represent_pair(model, hyper: str, hypo: str, table, image_key: str | None = None) -> FusedPair:
    """Full fusion path for one candidate pair at inference time.

    Both terms must have text embeddings. When the hyponym image is available
    the hypernym side mixes in the assigned prototype and the hyponym side the
    instance feature; otherwise both gates are 0 and the pair is text-only.
    """
    heads = model.heads
    hyper_entry = table.lookup(hyper, "text")
    hypo_entry = table.lookup(hypo, "text")
    if hyper_entry is None:
        raise MissingTextEmbeddingError(f"no text embedding for {hyper!r}")
    if hypo_entry is None:
        raise MissingTextEmbeddingError(f"no text embedding for {hypo!r}")
    t_e = encode_text_term(heads, hyper_entry)
    t_o = encode_text_term(heads, hypo_entry)

    img = table.lookup(image_key, "image") if image_key is not None else None
    if img is None:
        return FusedPair(c_e=t_e, c_o=t_o, alpha_e=0.0, alpha_o=0.0)

    v = encode_image(heads, img)
    _, p = assign(model.prototypes, v)
    z_e, _ = project_with_uncertainty(heads, t_e, "text")
    z_o, _ = project_with_uncertainty(heads, t_o, "text")
    z_p, _ = project_with_uncertainty(heads, p, "vis")
    z_v, _ = project_with_uncertainty(heads, v, "vis")
    alpha_e, alpha_o = gate_weights(z_e, z_p, z_o, z_v)
    return FusedPair(
        c_e=fuse(t_e, p, alpha_e),
        c_o=fuse(t_o, v, alpha_o),
        alpha_e=alpha_e,
        alpha_o=alpha_o,
    )
