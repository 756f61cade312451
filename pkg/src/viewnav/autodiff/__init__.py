from .check import grad_check
from .nn import (
    attention_block,
    attention_weights,
    cosine_similarity,
    cross_entropy,
    kl_divergence,
    linear,
    log_softmax,
    logsumexp,
    mhsa,
    softmax,
)
from .optim import decayed_lr, sgd_step
from .params import ParamSet
from .tensor import (
    GradCheckError,
    ShapeError,
    Tape,
    Tensor,
    as_tensor,
    concat,
    exp,
    index_select,
    log,
    matmul,
    reshape,
    sqrt,
    stack,
    tanh,
    tmean,
    transpose,
    tsum,
)

__all__ = [
    "GradCheckError",
    "ParamSet",
    "ShapeError",
    "Tape",
    "Tensor",
    "as_tensor",
    "attention_block",
    "attention_weights",
    "concat",
    "cosine_similarity",
    "cross_entropy",
    "decayed_lr",
    "exp",
    "grad_check",
    "index_select",
    "kl_divergence",
    "linear",
    "log",
    "log_softmax",
    "logsumexp",
    "matmul",
    "mhsa",
    "reshape",
    "sgd_step",
    "softmax",
    "sqrt",
    "stack",
    "tanh",
    "tmean",
    "transpose",
    "tsum",
]
