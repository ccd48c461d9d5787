from . import nn
from .checkpoint import CheckpointError, assign_params, load_params, save_params
from .optim import Adam, AdamState, adam_step
from .tensor import (
    ShapeError,
    Tensor,
    add,
    concat,
    div,
    einsum,
    exp,
    gelu,
    getitem,
    layer_norm,
    log,
    log_sigmoid,
    mae_loss,
    matmul,
    maximum,
    mul,
    neg,
    no_grad,
    relu,
    reshape,
    sigmoid,
    silu,
    softmax,
    stack,
    sub,
    tabs,
    tanh,
    tmean,
    transpose,
    tsum,
)

__all__ = [
    "Adam",
    "AdamState",
    "CheckpointError",
    "ShapeError",
    "Tensor",
    "adam_step",
    "add",
    "assign_params",
    "concat",
    "div",
    "einsum",
    "exp",
    "gelu",
    "getitem",
    "layer_norm",
    "load_params",
    "log",
    "log_sigmoid",
    "mae_loss",
    "matmul",
    "maximum",
    "mul",
    "neg",
    "nn",
    "no_grad",
    "relu",
    "reshape",
    "save_params",
    "sigmoid",
    "silu",
    "softmax",
    "stack",
    "sub",
    "tabs",
    "tanh",
    "tmean",
    "transpose",
    "tsum",
]
