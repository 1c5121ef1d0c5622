"""Core domain for gqla."""

from ._bp import (
    BpConfig,
    BpWorkspace,
    FloatArray,
    GradientMode,
    LlrVector,
    LossValue,
    WGradient,
    backward,
    bce_loss,
    bp_decode,
    bp_decode_gated,
    hard_decision,
)
from ._channel import (
    DEFAULT_MAX_BLOCKS,
    DEFAULT_MIN_BLOCKS,
    DEFAULT_Z,
    BlerEstimate,
    ChannelSpec,
    ErrorPatternSpec,
    Stream,
    agresti_coull_interval,
    agresti_coull_update,
    awgn_llrs,
    block_errors,
    sample_training_llrs,
    stream_rng,
    z_for_confidence,
)
from ._code import (
    BitArray,
    CodeDimensions,
    DensitySpec,
    GeneratorMatrix,
    ParityCheckMatrix,
    build_generator,
    encode,
    sample_w,
    syndrome,
)
from ._error import GqlaError
from ._graph import (
    DegreeDistribution,
    GirthHistogram,
    Node,
    NodeKind,
    TannerGraph,
    degree_distributions,
    girth_histograms,
    node_girth,
)
from ._optim import (
    DsfState,
    Optimizer,
    OptimizerSpec,
    OptimizerVariant,
    QuantizedGradient,
    StepOutcome,
    UpdateMatrix,
    dsf_step,
    get_optimizer,
    init_weights,
    mb_gqla_step,
    quantize,
    s_gqla_batch_quantize,
    update_matrix_accumulate,
    update_matrix_flush,
)

__all__ = [
    "GqlaError",
    # Codes
    "BitArray",
    "CodeDimensions",
    "DensitySpec",
    "GeneratorMatrix",
    "ParityCheckMatrix",
    "build_generator",
    "encode",
    "sample_w",
    "syndrome",
    # Belief propagation
    "BpConfig",
    "BpWorkspace",
    "FloatArray",
    "GradientMode",
    "LlrVector",
    "LossValue",
    "WGradient",
    "backward",
    "bce_loss",
    "bp_decode",
    "bp_decode_gated",
    "hard_decision",
    # Channels
    "DEFAULT_MAX_BLOCKS",
    "DEFAULT_MIN_BLOCKS",
    "DEFAULT_Z",
    "BlerEstimate",
    "ChannelSpec",
    "ErrorPatternSpec",
    "Stream",
    "agresti_coull_interval",
    "agresti_coull_update",
    "awgn_llrs",
    "block_errors",
    "sample_training_llrs",
    "stream_rng",
    "z_for_confidence",
    # Optimizers
    "DsfState",
    "Optimizer",
    "OptimizerSpec",
    "OptimizerVariant",
    "QuantizedGradient",
    "StepOutcome",
    "UpdateMatrix",
    "dsf_step",
    "get_optimizer",
    "init_weights",
    "mb_gqla_step",
    "quantize",
    "s_gqla_batch_quantize",
    "update_matrix_accumulate",
    "update_matrix_flush",
    # Graph analysis
    "DegreeDistribution",
    "GirthHistogram",
    "Node",
    "NodeKind",
    "TannerGraph",
    "degree_distributions",
    "girth_histograms",
    "node_girth",
]
