"""Dense arrays with reverse-mode differentiation.

All model forwards, losses, and optimizer inputs in this package are built
on the primitives exported here. Verification runs in float64; training
normally runs in float32.
"""

from .core import (
    ShapeError,
    Tape,
    Tensor,
    add,
    backward,
    div,
    exp,
    log1p_exp,
    mul,
    neg,
    relu,
    sigmoid,
    sqrt,
    sub,
    tanh,
    tape,
)
from .arrayops import (
    concat,
    conv1d,
    cumsum,
    depthwise_conv1d_causal,
    dropout,
    einsum2,
    matmul,
    maxpool1d,
    reduce_max,
    reduce_mean,
    reduce_sum,
    reshape,
    select,
    slice_axis,
    softmax,
    stack,
    transpose,
)
from .gradcheck import GradCheckResult, grad_check

__all__ = [
    "GradCheckResult",
    "ShapeError",
    "Tape",
    "Tensor",
    "add",
    "backward",
    "concat",
    "conv1d",
    "cumsum",
    "depthwise_conv1d_causal",
    "div",
    "dropout",
    "einsum2",
    "exp",
    "grad_check",
    "log1p_exp",
    "matmul",
    "maxpool1d",
    "mul",
    "neg",
    "reduce_max",
    "reduce_mean",
    "reduce_sum",
    "relu",
    "reshape",
    "select",
    "sigmoid",
    "slice_axis",
    "softmax",
    "sqrt",
    "stack",
    "sub",
    "tanh",
    "tape",
    "transpose",
]
