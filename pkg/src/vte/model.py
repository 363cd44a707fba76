"""Model container and versioned binary checkpoints.

A checkpoint file is a one-line JSON manifest (format version, config echo,
tensor names and shapes) followed by the concatenated row-major little-endian
float64 payloads, in manifest order. Round-trips are bit-exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .config import TrainConfig
from .errors import ParseError, VersionError
from .fusion import DetectorParams, init_detector
from .heads import HeadParams, init_heads
from .prototypes import PrototypeTable, init_prototypes

FORMAT_VERSION = 1
_MAGIC = "vte-checkpoint"


@dataclass
class ModelParams:
    heads: HeadParams
    detector: DetectorParams
    prototypes: PrototypeTable
    config: dict

    def trainable_tensors(self) -> dict[str, np.ndarray]:
        """Named gradient-trained tensors, in canonical order (codebook excluded)."""
        h, det = self.heads, self.detector
        out = {
            "f_text.w": h.f_text_w, "f_text.b": h.f_text_b,
            "f_vis.w": h.f_vis_w, "f_vis.b": h.f_vis_b,
            "g_text.w": h.g_text_w, "g_text.b": h.g_text_b,
            "g_vis.w": h.g_vis_w, "g_vis.b": h.g_vis_b,
        }
        if det.hidden_w is not None:
            out["detector.hidden_w"] = det.hidden_w
            out["detector.hidden_b"] = det.hidden_b
        out["detector.w"] = det.w
        out["detector.b"] = det.b
        return out

    def all_tensors(self) -> dict[str, np.ndarray]:
        out = self.trainable_tensors()
        out["prototypes.p"] = self.prototypes.rows
        return out

    def zero_grads(self) -> dict[str, np.ndarray]:
        return {name: np.zeros_like(arr) for name, arr in self.trainable_tensors().items()}


def init_model(config: TrainConfig, text_dim: int, image_dim: int, rng,
               head_scale: float | None = None) -> ModelParams:
    """Seeded initialization. Heads are uniform, the detector starts at zero
    (an untrained model scores every pair at 0.5), and the codebook is uniform
    on [-1/sqrt(e), 1/sqrt(e)]."""
    heads = init_heads(text_dim, image_dim, config.d, config.d_z, rng, scale=head_scale)
    detector = init_detector(config.d, threshold=config.threshold, hidden=config.detector_hidden)
    prototypes = init_prototypes(config.k, config.d, rng,
                                 ema_alpha=config.ema_alpha, ema_eps=config.ema_eps)
    echo = config.to_dict()
    echo["text_dim"] = text_dim
    echo["image_dim"] = image_dim
    return ModelParams(heads=heads, detector=detector, prototypes=prototypes, config=echo)


def save_checkpoint(model: ModelParams, path) -> None:
    tensors = model.all_tensors()
    manifest = {
        "magic": _MAGIC,
        "format_version": FORMAT_VERSION,
        "config": model.config,
        "tensors": [{"name": name, "shape": list(arr.shape)} for name, arr in tensors.items()],
    }
    header = json.dumps(manifest, sort_keys=True, separators=(",", ":"))
    with open(path, "wb") as fh:
        fh.write(header.encode("utf-8"))
        fh.write(b"\n")
        for arr in tensors.values():
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def _rebuild(config: dict, arrays: dict[str, np.ndarray]) -> ModelParams:
    heads = HeadParams(
        f_text_w=arrays["f_text.w"], f_text_b=arrays["f_text.b"],
        f_vis_w=arrays["f_vis.w"], f_vis_b=arrays["f_vis.b"],
        g_text_w=arrays["g_text.w"], g_text_b=arrays["g_text.b"],
        g_vis_w=arrays["g_vis.w"], g_vis_b=arrays["g_vis.b"],
    )
    detector = DetectorParams(
        w=arrays["detector.w"], b=arrays["detector.b"],
        threshold=float(config.get("threshold", 0.5)),
        hidden_w=arrays.get("detector.hidden_w"),
        hidden_b=arrays.get("detector.hidden_b"),
    )
    prototypes = PrototypeTable(
        rows=arrays["prototypes.p"],
        ema_alpha=float(config.get("ema_alpha", 0.999)),
        ema_eps=float(config.get("ema_eps", 0.001)),
    )
    return ModelParams(heads=heads, detector=detector, prototypes=prototypes, config=config)


def load_checkpoint(path) -> ModelParams:
    """Load and validate a checkpoint; inverse of save_checkpoint."""
    with open(path, "rb") as fh:
        header_line = fh.readline()
        payload = fh.read()
    try:
        manifest = json.loads(header_line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"unreadable checkpoint manifest: {exc}") from exc
    if not isinstance(manifest, dict) or manifest.get("magic") != _MAGIC:
        raise ParseError("not a checkpoint file")
    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionError(f"unsupported checkpoint format version {version!r}, "
                           f"expected {FORMAT_VERSION}")
    config = manifest.get("config", {})
    specs = manifest.get("tensors")
    if not isinstance(specs, list):
        raise ParseError("manifest lacks a tensor list")

    arrays: dict[str, np.ndarray] = {}
    offset = 0
    for spec in specs:
        shape = tuple(int(s) for s in spec["shape"])
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 8
        if offset + nbytes > len(payload):
            raise ParseError(f"checkpoint truncated while reading {spec['name']!r}")
        flat = np.frombuffer(payload, dtype="<f8", count=count, offset=offset)
        arrays[spec["name"]] = flat.reshape(shape).copy()
        offset += nbytes
    if offset != len(payload):
        raise ParseError("checkpoint payload has trailing bytes")

    required = {"f_text.w", "f_text.b", "f_vis.w", "f_vis.b", "g_text.w", "g_text.b",
                "g_vis.w", "g_vis.b", "detector.w", "detector.b", "prototypes.p"}
    missing = required - set(arrays)
    if missing:
        raise ParseError(f"checkpoint missing tensors: {sorted(missing)}")

    d_cfg = int(config.get("d", arrays["f_text.w"].shape[0]))
    d_actual = arrays["f_text.w"].shape[0]
    if d_actual != d_cfg:
        raise VersionError(f"checkpoint head dimension mismatch: config d={d_cfg} "
                           f"but tensors have d={d_actual}")
    if arrays["prototypes.p"].shape[1] != d_actual:
        raise VersionError(f"prototype dimension {arrays['prototypes.p'].shape[1]} "
                           f"!= head dimension {d_actual}")
    return _rebuild(config, arrays)
