from .tensor import Tensor, UsageError, backward, concat, no_grad, stack
from .layers import DenseLayer, GateBlock, GruCell, Module, dense_forward, gru_step, orthogonal_init
from .optim import OptimizerState, clip_grad_norm, optimizer_update
from .gradcheck import GradCheckReport, check_gradients, finite_difference_gradients, relative_error

__all__ = [
    "Tensor", "UsageError", "backward", "concat", "no_grad", "stack",
    "DenseLayer", "GateBlock", "GruCell", "Module", "dense_forward", "gru_step", "orthogonal_init",
    "OptimizerState", "clip_grad_norm", "optimizer_update",
    "GradCheckReport", "check_gradients", "finite_difference_gradients", "relative_error",
]
