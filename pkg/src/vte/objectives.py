"""The four training objectives and their analytic gradients.

Three contrastive terms (textual hypernymy, instance-prototype, and the
uncertainty-scaled hyper-proto constraint) plus the fused-pair detection BCE,
summed with unit weights. Every backward rule here is hand-derived and
checked against the central-difference oracle in `numerics.finite_diff_grad`;
the quantization step is straight-through, so its gradient routes to the
visual feature and the codebook receives exactly zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BatchTooSmallError, ShapeError, ZeroVectorError
from .numerics import (
    as_f64,
    log_softmax_rows,
    normalize_rows,
    normalize_rows_backward,
    sigmoid,
    softplus,
)
from .prototypes import assign_batch


def _softmax_ce_diag(logits: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean cross-entropy with the diagonal as targets; returns (loss, dlogits)."""
    n = logits.shape[0]
    lsm = log_softmax_rows(logits)
    loss = -float(np.trace(lsm)) / n
    dlogits = np.exp(lsm)
    dlogits[np.diag_indices(n)] -= 1.0
    dlogits /= n
    return loss, dlogits


def info_nce(anchor, positive, negatives, tau: float) -> float:
    """Contrastive loss of one anchor against its positive and negatives.

    -log( e^{a.p/tau} / (e^{a.p/tau} + sum_i e^{a.n_i/tau}) ), computed with
    max subtraction inside the log-sum-exp so large similarities cannot
    overflow. Always positive.
    """
    if tau <= 0:
        raise ValueError("temperature must be positive")
    anchor, positive = as_f64(anchor), as_f64(positive)
    negatives = np.atleast_2d(as_f64(negatives))
    if negatives.shape[0] < 1:
        raise BatchTooSmallError("need at least one negative")
    if anchor.shape != positive.shape or negatives.shape[1] != anchor.shape[0]:
        raise ShapeError("anchor, positive, and negatives must share one dimension")
    logits = np.concatenate([[anchor @ positive], negatives @ anchor]) / tau
    m = logits.max()
    return float(m + np.log(np.exp(logits - m).sum()) - logits[0])


def text_hypernymy_loss(t_o: np.ndarray, t_e: np.ndarray, tau: float):
    """Batched textual objective: anchors are hyponym representations, the
    positive is the pair's hypernym representation, and negatives are the
    hypernym representations of the other pairs in the batch.

    Returns (loss, (d_t_o, d_t_e)).
    """
    if tau <= 0:
        raise ValueError("temperature must be positive")
    t_o, t_e = as_f64(t_o), as_f64(t_e)
    if t_o.shape != t_e.shape or t_o.ndim != 2:
        raise ShapeError("anchor and positive matrices must be (n, d)")
    if t_o.shape[0] < 2:
        raise BatchTooSmallError("textual objective needs a batch of at least 2 pairs")
    loss, dlogits = _softmax_ce_diag((t_o @ t_e.T) / tau)
    return loss, (dlogits @ t_e / tau, dlogits.T @ t_o / tau)


def proto_loss(v: np.ndarray, p: np.ndarray, tau: float):
    """Instance-prototype contrastive objective on L2-normalized copies.

    `p` holds the straight-through prototype values: the returned d_p is the
    gradient at those values, which the quantization layer routes onward to v,
    leaving the codebook untouched. Returns (loss, (d_v, d_p)).
    """
    if tau <= 0:
        raise ValueError("temperature must be positive")
    v, p = as_f64(v), as_f64(p)
    if v.shape != p.shape or v.ndim != 2:
        raise ShapeError("feature and prototype matrices must be (n, e)")
    if v.shape[0] < 2:
        raise BatchTooSmallError("prototype objective needs a batch of at least 2 items")
    vn, v_norms = normalize_rows(v)
    pn, p_norms = normalize_rows(p)
    loss, dlogits = _softmax_ce_diag((vn @ pn.T) / tau)
    d_v = normalize_rows_backward(dlogits @ pn / tau, vn, v_norms)
    d_p = normalize_rows_backward(dlogits.T @ vn / tau, pn, p_norms)
    return loss, (d_v, d_p)


def hpc_loss(z_h: np.ndarray, tau_h: np.ndarray, z_p: np.ndarray, tau_p: np.ndarray):
    """Uncertainty-scaled alignment between projected hypernym text and
    projected prototypes.

    Logits are (tau_h z_h) . (tau_p z_p) with no fixed temperature divisor;
    each anchor's negatives are the other items' scaled prototype projections.
    Returns (loss, (d_z_h, d_tau_h, d_z_p, d_tau_p)).
    """
    z_h, z_p = as_f64(z_h), as_f64(z_p)
    tau_h, tau_p = as_f64(tau_h), as_f64(tau_p)
    if z_h.shape != z_p.shape or z_h.ndim != 2:
        raise ShapeError("projection matrices must be (n, d_z)")
    if tau_h.shape != (z_h.shape[0],) or tau_p.shape != (z_p.shape[0],):
        raise ShapeError("uncertainty scales must be one per row")
    if z_h.shape[0] < 2:
        raise BatchTooSmallError("hyper-proto constraint needs a batch of at least 2 items")
    if np.any(tau_h <= 0) or np.any(tau_h >= 1) or np.any(tau_p <= 0) or np.any(tau_p >= 1):
        raise ValueError("uncertainty scales must lie in (0, 1)")
    a = tau_h[:, None] * z_h
    b = tau_p[:, None] * z_p
    loss, dlogits = _softmax_ce_diag(a @ b.T)
    d_a = dlogits @ b
    d_b = dlogits.T @ a
    d_z_h = tau_h[:, None] * d_a
    d_tau_h = np.sum(d_a * z_h, axis=1)
    d_z_p = tau_p[:, None] * d_b
    d_tau_p = np.sum(d_b * z_p, axis=1)
    return loss, (d_z_h, d_tau_h, d_z_p, d_tau_p)


def bce_loss(logit: float, label: int) -> float:
    """Binary cross-entropy of y_hat = sigmoid(logit) against a 0/1 label,
    computed in the fused softplus form so saturated logits stay finite."""
    if label not in (0, 1):
        raise ValueError("label must be 0 or 1")
    return float(softplus(logit) - label * logit)


# --- full-model objective --------------------------------------------------


@dataclass
class TaskBatch:
    """Numeric payload for one training step.

    The first block holds the positive pairs that feed the three contrastive
    tasks (`image_rows[i]` says which pair the i-th image belongs to; pairs
    without images simply do not appear there). The detection block holds
    positives plus sampled negatives with 0/1 labels.
    """

    hyper_text: np.ndarray                    # (n, text_dim)
    hypo_text: np.ndarray                     # (n, text_dim)
    images: np.ndarray                        # (m, image_dim)
    image_rows: np.ndarray                    # (m,)
    det_hyper_text: np.ndarray                # (q, text_dim)
    det_hypo_text: np.ndarray                 # (q, text_dim)
    det_images: np.ndarray                    # (qm, image_dim)
    det_image_rows: np.ndarray                # (qm,)
    labels: np.ndarray                        # (q,)

    @property
    def n_pairs(self) -> int:
        return self.hyper_text.shape[0]


@dataclass
class QuantCache:
    """Frozen quantization state: assignment indices plus the stop-gradient
    offsets (prototype minus feature) captured on the base forward pass. The
    gradient oracle re-evaluates the loss with these held constant, which is
    exactly the function the straight-through backward differentiates."""

    pos_indices: np.ndarray
    pos_offsets: np.ndarray
    det_indices: np.ndarray
    det_offsets: np.ndarray


@dataclass
class LossBreakdown:
    text: float = 0.0
    proto: float = 0.0
    hpc: float = 0.0
    bce: float = 0.0

    @property
    def total(self) -> float:
        return self.text + self.proto + self.hpc + self.bce

    def to_dict(self) -> dict:
        return {"text": self.text, "proto": self.proto, "hpc": self.hpc,
                "bce": self.bce, "total": self.total}


@dataclass
class TotalLossResult:
    losses: LossBreakdown
    grads: dict | None
    quant: QuantCache
    pos_visual: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))


def _gate_cos(z_text: np.ndarray, z_vis: np.ndarray):
    """Row-wise cosine between projected text and visual vectors, with the
    pieces needed for the backward pass."""
    tn = np.linalg.norm(z_text, axis=1)
    vn = np.linalg.norm(z_vis, axis=1)
    if np.any(tn == 0) or np.any(vn == 0):
        raise ZeroVectorError("zero projected vector in gate computation")
    t_hat = z_text / tn[:, None]
    v_hat = z_vis / vn[:, None]
    cos = np.sum(t_hat * v_hat, axis=1)
    return cos, t_hat, v_hat, tn, vn


def _gate_cos_backward(dcos, cos, t_hat, v_hat, tn, vn):
    d_text = dcos[:, None] * (v_hat - cos[:, None] * t_hat) / tn[:, None]
    d_vis = dcos[:, None] * (t_hat - cos[:, None] * v_hat) / vn[:, None]
    return d_text, d_vis


def total_loss(model, batch: TaskBatch, tau_text: float = 0.1, tau_proto: float = 0.1,
               frozen: QuantCache | None = None, with_grads: bool = True) -> TotalLossResult:
    """Sum of the four objectives over one batch, with gradients for every
    trainable tensor.

    Pairs without images contribute only to the textual and detection terms;
    the instance-prototype and hyper-proto terms need at least two items with
    images and are otherwise zero. Passing `frozen` re-evaluates the loss at
    the captured assignments and stop-gradient offsets (the finite-difference
    oracle's view of the model).
    """
    heads = model.heads
    det = model.detector
    codebook = model.prototypes
    d = heads.d

    n = batch.n_pairs
    if n < 2:
        raise BatchTooSmallError("training batch needs at least 2 positive pairs")

    t_e = batch.hyper_text @ heads.f_text_w.T + heads.f_text_b
    t_o = batch.hypo_text @ heads.f_text_w.T + heads.f_text_b

    m = batch.images.shape[0]
    if m > 0:
        v = batch.images @ heads.f_vis_w.T + heads.f_vis_b
        if frozen is None:
            pos_idx = assign_batch(codebook, v)
            pos_off = codebook.rows[pos_idx] - v
            p_st = codebook.rows[pos_idx].copy()
        else:
            pos_idx = frozen.pos_indices
            pos_off = frozen.pos_offsets
            p_st = v + pos_off
    else:
        v = np.zeros((0, d))
        pos_idx = np.zeros(0, dtype=np.int64)
        pos_off = np.zeros((0, d))
        p_st = np.zeros((0, d))

    losses = LossBreakdown()

    # textual hypernymy
    loss_text, dlogits_text = _softmax_ce_diag((t_o @ t_e.T) / tau_text)
    losses.text = loss_text

    # instance-prototype and hyper-proto terms
    if m >= 2:
        v_n, v_norms = normalize_rows(v)
        p_n, p_norms = normalize_rows(p_st)
        loss_proto, dlogits_proto = _softmax_ce_diag((v_n @ p_n.T) / tau_proto)
        losses.proto = loss_proto

        t_eh = t_e[batch.image_rows]
        y_h = t_eh @ heads.g_text_w.T + heads.g_text_b
        z_h, u_h = y_h[:, :-1], y_h[:, -1]
        sc_h = sigmoid(u_h)
        y_p = p_st @ heads.g_vis_w.T + heads.g_vis_b
        z_p, u_p = y_p[:, :-1], y_p[:, -1]
        sc_p = sigmoid(u_p)
        a = sc_h[:, None] * z_h
        b = sc_p[:, None] * z_p
        loss_hpc, dlogits_hpc = _softmax_ce_diag(a @ b.T)
        losses.hpc = loss_hpc

    # detection block
    q = batch.det_hyper_text.shape[0]
    qm = batch.det_images.shape[0]
    if q > 0:
        te_d = batch.det_hyper_text @ heads.f_text_w.T + heads.f_text_b
        to_d = batch.det_hypo_text @ heads.f_text_w.T + heads.f_text_b
        c_e = te_d.copy()
        c_o = to_d.copy()
        if qm > 0:
            rows = batch.det_image_rows
            v_d = batch.det_images @ heads.f_vis_w.T + heads.f_vis_b
            if frozen is None:
                det_idx = assign_batch(codebook, v_d)
                det_off = codebook.rows[det_idx] - v_d
                p_d = codebook.rows[det_idx].copy()
            else:
                det_idx = frozen.det_indices
                det_off = frozen.det_offsets
                p_d = v_d + det_off
            ye_d = te_d[rows] @ heads.g_text_w.T + heads.g_text_b
            yo_d = to_d[rows] @ heads.g_text_w.T + heads.g_text_b
            yp_d = p_d @ heads.g_vis_w.T + heads.g_vis_b
            yv_d = v_d @ heads.g_vis_w.T + heads.g_vis_b
            ze_d, zo_d = ye_d[:, :-1], yo_d[:, :-1]
            zp_d, zv_d = yp_d[:, :-1], yv_d[:, :-1]
            cos_e, ze_hat, zp_hat, ze_n, zp_n = _gate_cos(ze_d, zp_d)
            cos_o, zo_hat, zv_hat, zo_n, zv_n = _gate_cos(zo_d, zv_d)
            alpha_e = sigmoid(cos_e)
            alpha_o = sigmoid(cos_o)
            c_e[rows] = (1.0 - alpha_e)[:, None] * te_d[rows] + alpha_e[:, None] * p_d
            c_o[rows] = (1.0 - alpha_o)[:, None] * to_d[rows] + alpha_o[:, None] * v_d
        else:
            det_idx = np.zeros(0, dtype=np.int64)
            det_off = np.zeros((0, d))

        feats = np.concatenate([c_e, c_o, c_e * c_o], axis=1)
        if det.hidden_w is not None:
            h_act = np.tanh(feats @ det.hidden_w.T + det.hidden_b)
            logits_b = h_act @ det.w + det.b[0]
        else:
            logits_b = feats @ det.w + det.b[0]
        labels = as_f64(batch.labels)
        losses.bce = float(np.mean(softplus(logits_b) - labels * logits_b))
    else:
        det_idx = np.zeros(0, dtype=np.int64)
        det_off = np.zeros((0, d))

    quant = QuantCache(pos_indices=pos_idx, pos_offsets=pos_off,
                       det_indices=det_idx, det_offsets=det_off)
    if not with_grads:
        return TotalLossResult(losses=losses, grads=None, quant=quant, pos_visual=v)

    # ---- backward ----
    grads = model.zero_grads()
    d_t_e = np.zeros_like(t_e)
    d_t_o = np.zeros_like(t_o)
    d_v = np.zeros_like(v)
    d_p_st = np.zeros_like(p_st)

    # detection
    if q > 0:
        dlogit = (sigmoid(logits_b) - labels) / q
        if det.hidden_w is not None:
            grads["detector.w"] += h_act.T @ dlogit
            grads["detector.b"] += np.array([dlogit.sum()])
            d_hact = np.outer(dlogit, det.w)
            d_hpre = d_hact * (1.0 - h_act * h_act)
            grads["detector.hidden_w"] += d_hpre.T @ feats
            grads["detector.hidden_b"] += d_hpre.sum(axis=0)
            d_feats = d_hpre @ det.hidden_w
        else:
            grads["detector.w"] += feats.T @ dlogit
            grads["detector.b"] += np.array([dlogit.sum()])
            d_feats = np.outer(dlogit, det.w)
        d_ce = d_feats[:, :d] + d_feats[:, 2 * d:] * c_o
        d_co = d_feats[:, d:2 * d] + d_feats[:, 2 * d:] * c_e

        d_te_d = d_ce.copy()
        d_to_d = d_co.copy()
        if qm > 0:
            d_te_d[rows] = (1.0 - alpha_e)[:, None] * d_ce[rows]
            d_to_d[rows] = (1.0 - alpha_o)[:, None] * d_co[rows]
            d_p_d = alpha_e[:, None] * d_ce[rows]
            d_v_d = alpha_o[:, None] * d_co[rows]
            d_alpha_e = np.sum(d_ce[rows] * (p_d - te_d[rows]), axis=1)
            d_alpha_o = np.sum(d_co[rows] * (v_d - to_d[rows]), axis=1)
            d_cos_e = alpha_e * (1.0 - alpha_e) * d_alpha_e
            d_cos_o = alpha_o * (1.0 - alpha_o) * d_alpha_o
            d_ze, d_zp = _gate_cos_backward(d_cos_e, cos_e, ze_hat, zp_hat, ze_n, zp_n)
            d_zo, d_zv = _gate_cos_backward(d_cos_o, cos_o, zo_hat, zv_hat, zo_n, zv_n)
            pad = np.zeros((qm, 1))
            for d_z, inputs, which in ((d_ze, te_d[rows], "text"), (d_zo, to_d[rows], "text"),
                                       (d_zp, p_d, "vis"), (d_zv, v_d, "vis")):
                d_y = np.concatenate([d_z, pad], axis=1)
                grads[f"g_{which}.w"] += d_y.T @ inputs
                grads[f"g_{which}.b"] += d_y.sum(axis=0)
            d_te_d[rows] += np.concatenate([d_ze, pad], axis=1) @ heads.g_text_w
            d_to_d[rows] += np.concatenate([d_zo, pad], axis=1) @ heads.g_text_w
            d_p_d += np.concatenate([d_zp, pad], axis=1) @ heads.g_vis_w
            d_v_d += np.concatenate([d_zv, pad], axis=1) @ heads.g_vis_w
            d_v_d += d_p_d  # straight-through
            grads["f_vis.w"] += d_v_d.T @ batch.det_images
            grads["f_vis.b"] += d_v_d.sum(axis=0)
        grads["f_text.w"] += d_te_d.T @ batch.det_hyper_text + d_to_d.T @ batch.det_hypo_text
        grads["f_text.b"] += d_te_d.sum(axis=0) + d_to_d.sum(axis=0)

    # hyper-proto constraint
    if m >= 2:
        d_a = dlogits_hpc @ b
        d_b = dlogits_hpc.T @ a
        d_z_h = sc_h[:, None] * d_a
        d_u_h = sc_h * (1.0 - sc_h) * np.sum(d_a * z_h, axis=1)
        d_z_p = sc_p[:, None] * d_b
        d_u_p = sc_p * (1.0 - sc_p) * np.sum(d_b * z_p, axis=1)
        d_y_h = np.concatenate([d_z_h, d_u_h[:, None]], axis=1)
        d_y_p = np.concatenate([d_z_p, d_u_p[:, None]], axis=1)
        grads["g_text.w"] += d_y_h.T @ t_eh
        grads["g_text.b"] += d_y_h.sum(axis=0)
        grads["g_vis.w"] += d_y_p.T @ p_st
        grads["g_vis.b"] += d_y_p.sum(axis=0)
        np.add.at(d_t_e, batch.image_rows, d_y_h @ heads.g_text_w)
        d_p_st += d_y_p @ heads.g_vis_w

        # instance-prototype
        d_v += normalize_rows_backward(dlogits_proto @ p_n / tau_proto, v_n, v_norms)
        d_p_st += normalize_rows_backward(dlogits_proto.T @ v_n / tau_proto, p_n, p_norms)

    # textual hypernymy
    d_t_o += dlogits_text @ t_e / tau_text
    d_t_e += dlogits_text.T @ t_o / tau_text

    # straight-through for the contrastive block, then the encoder heads
    if m > 0:
        d_v += d_p_st
        grads["f_vis.w"] += d_v.T @ batch.images
        grads["f_vis.b"] += d_v.sum(axis=0)
    grads["f_text.w"] += d_t_e.T @ batch.hyper_text + d_t_o.T @ batch.hypo_text
    grads["f_text.b"] += d_t_e.sum(axis=0) + d_t_o.sum(axis=0)

    return TotalLossResult(losses=losses, grads=grads, quant=quant, pos_visual=v)
