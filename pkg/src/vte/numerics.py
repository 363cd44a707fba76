"""Dense float64 math kernels: affine layers with analytic gradients, stable
sigmoid/softmax helpers, an AdamW optimizer, and the central-difference
gradient oracle that every backward rule in this package is tested against.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteError, ShapeError, ZeroVectorError


def as_f64(x) -> np.ndarray:
    return np.asarray(x, dtype=np.float64)


def sigmoid(x):
    """Numerically stable logistic function, elementwise."""
    x = as_f64(x)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    if out.ndim == 0:
        return float(out)
    return out


def softplus(x):
    """log(1 + e^x) without overflow."""
    x = as_f64(x)
    out = np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))
    if out.ndim == 0:
        return float(out)
    return out


def log_softmax_rows(logits: np.ndarray) -> np.ndarray:
    """Row-wise log-softmax with max subtraction."""
    m = logits.max(axis=1, keepdims=True)
    shifted = logits - m
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    m = logits.max(axis=1, keepdims=True)
    e = np.exp(logits - m)
    return e / e.sum(axis=1, keepdims=True)


def l2_normalize(x: np.ndarray) -> np.ndarray:
    """Scale a vector to unit Euclidean norm. Raises ZeroVectorError on zero input."""
    x = as_f64(x)
    norm = float(np.linalg.norm(x))
    if norm == 0.0:
        raise ZeroVectorError("cannot normalize a zero vector")
    return x / norm


def normalize_rows(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-normalize a matrix; returns (normalized, row_norms)."""
    norms = np.linalg.norm(x, axis=1)
    if np.any(norms == 0.0):
        raise ZeroVectorError("cannot normalize a zero row")
    return x / norms[:, None], norms


def normalize_rows_backward(d_normed, normed, norms):
    """Gradient of row normalization: routes d(x/|x|) back to x."""
    inner = np.sum(d_normed * normed, axis=1, keepdims=True)
    return (d_normed - inner * normed) / norms[:, None]


# --- affine layers ---------------------------------------------------------


def affine_forward(w: np.ndarray, b: np.ndarray, x: np.ndarray) -> np.ndarray:
    """y = W x + b for a single vector x."""
    w, b, x = as_f64(w), as_f64(b), as_f64(x)
    if w.ndim != 2 or x.ndim != 1 or b.ndim != 1:
        raise ShapeError("affine_forward expects W (out,in), b (out,), x (in,)")
    if w.shape[1] != x.shape[0] or w.shape[0] != b.shape[0]:
        raise ShapeError(
            f"affine shapes do not conform: W {w.shape}, b {b.shape}, x {x.shape}"
        )
    return w @ x + b


def affine_backward(w, b, x, upstream):
    """Gradients of y = W x + b. Returns (dW, db, dx)."""
    w, x, upstream = as_f64(w), as_f64(x), as_f64(upstream)
    if upstream.shape != (w.shape[0],):
        raise ShapeError("upstream gradient shape does not match output")
    dw = np.outer(upstream, x)
    db = upstream.copy()
    dx = w.T @ upstream
    return dw, db, dx


def affine_forward_batch(w: np.ndarray, b: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Y = X W^T + b for row-stacked inputs X (n, in)."""
    if x.ndim != 2 or w.shape[1] != x.shape[1]:
        raise ShapeError(f"batched affine: W {w.shape} vs X {x.shape}")
    return x @ w.T + b


def affine_backward_batch(w, x, upstream):
    """Batched affine gradients. Returns (dW, db, dX)."""
    dw = upstream.T @ x
    db = upstream.sum(axis=0)
    dx = upstream @ w
    return dw, db, dx


# --- finite differences ----------------------------------------------------


def finite_diff_grad(f, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of a scalar function of a flat vector.

    The independent oracle used to validate every hand-derived backward rule:
    (f(x + h e_i) - f(x - h e_i)) / (2h) per coordinate.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    x = as_f64(x).copy()
    grad = np.zeros_like(x)
    for i in range(x.size):
        orig = x[i]
        x[i] = orig + h
        up = f(x)
        x[i] = orig - h
        down = f(x)
        x[i] = orig
        if not (np.isfinite(up) and np.isfinite(down)):
            raise NonFiniteError(f"function evaluation non-finite at coordinate {i}")
        grad[i] = (up - down) / (2.0 * h)
    return grad


def relative_grad_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """Max absolute difference scaled by the largest gradient magnitude."""
    diff = float(np.max(np.abs(analytic - numeric))) if analytic.size else 0.0
    scale = max(
        float(np.max(np.abs(analytic))) if analytic.size else 0.0,
        float(np.max(np.abs(numeric))) if numeric.size else 0.0,
        1e-12,
    )
    return diff / scale


# --- optimizer -------------------------------------------------------------


@dataclass
class OptimizerState:
    """AdamW state: per-tensor first/second moments plus hyperparameters.

    `optimizer="adam"` runs the identical update with the decoupled weight
    decay term dropped.
    """

    lr: float = 5e-5
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.01
    optimizer: str = "adamw"
    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    @classmethod
    def for_params(cls, params: dict, lr=5e-5, beta1=0.9, beta2=0.999, eps=1e-8,
                   weight_decay=0.01, optimizer="adamw"):
        state = cls(lr=lr, beta1=beta1, beta2=beta2, eps=eps,
                    weight_decay=weight_decay, optimizer=optimizer)
        for name, arr in params.items():
            state.m[name] = np.zeros_like(arr)
            state.v[name] = np.zeros_like(arr)
        return state


def adamw_step(params: dict, grads: dict, state: OptimizerState):
    """One decoupled-weight-decay Adam step over a dict of named tensors.

    Mutates `params` and `state` in place and returns them. Decay is skipped
    when state.optimizer == "adam".
    """
    if state.lr <= 0:
        raise ValueError("learning rate must be positive")
    state.t += 1
    bc1 = 1.0 - state.beta1 ** state.t
    bc2 = 1.0 - state.beta2 ** state.t
    decay = state.weight_decay if state.optimizer == "adamw" else 0.0
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.shape:
            raise ShapeError(f"gradient shape {g.shape} != param shape {p.shape} for {name}")
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        m_hat = m / bc1
        v_hat = v / bc2
        if decay:
            p -= state.lr * decay * p
        p -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return params, state
