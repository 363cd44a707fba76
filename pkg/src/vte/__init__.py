"""Multimodal taxonomy expansion over precomputed term embeddings.

Textual hypernymy learning, vector-quantized visual prototype learning with
EMA codebook updates, an uncertainty-scaled cross-modal alignment constraint,
similarity-gated fusion detection, and top-down bootstrapping insertion of
accepted edges into an existing taxonomy.
"""

from .config import TrainConfig, apply_overrides, load_config, save_config
from .embeddings import EmbeddingTable, load_embeddings, write_embeddings
from .errors import (
    BatchTooSmallError,
    ConfigError,
    CycleError,
    DimensionMismatchError,
    EmptyInputError,
    MissingTextEmbeddingError,
    NoNegativeAvailableError,
    NonFiniteError,
    NonFiniteLossError,
    ParseError,
    SelfLoopError,
    ShapeError,
    UnknownTermError,
    VersionError,
    VteError,
    ZeroVectorError,
)
from .expansion import (
    Candidate,
    MetricsReport,
    PredictionRecord,
    evaluate,
    expand,
    load_candidates,
    score_pair,
)
from .fusion import DetectorParams, FusedPair, detect, fuse, gate_weights, represent_pair
from .gradcheck import run_grad_check
from .heads import (
    HeadParams,
    encode_image,
    encode_text_term,
    pool_tokens,
    project_with_uncertainty,
    uncertainty_scale,
)
from .model import ModelParams, init_model, load_checkpoint, save_checkpoint
from .numerics import (
    OptimizerState,
    adamw_step,
    affine_backward,
    affine_forward,
    finite_diff_grad,
    l2_normalize,
)
from .objectives import (
    LossBreakdown,
    TaskBatch,
    bce_loss,
    hpc_loss,
    info_nce,
    proto_loss,
    text_hypernymy_loss,
    total_loss,
)
from .prototypes import (
    AssignmentBatch,
    PrototypeTable,
    assign,
    dump_clusters,
    ema_update,
    init_prototypes,
    straight_through,
)
from .synth import SynthConfig, SynthDataset, generate, oracle_nearest, write_dataset
from .taxonomy import Taxonomy, load_edges, save_edges
from .training import TrainingPair, build_task_batch, sample_negatives, train

__version__ = "0.1.0"
