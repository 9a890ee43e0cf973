from __future__ import annotations

from torch import Tensor
from torch.autograd import Function


def grl_backward(grad: Tensor, coefficient: float) -> Tensor:
    """Gradient handed upstream by the reversal layer: ``-coefficient * grad``."""
    return grad * -coefficient


class _GradientReversal(Function):
    @staticmethod
    def forward(ctx, x: Tensor, coefficient: float) -> Tensor:
        ctx.coefficient = coefficient
        return x.view_as(x)

    @staticmethod
    def backward(ctx, grad_output: Tensor) -> tuple[Tensor, None]:
        return grl_backward(grad_output, ctx.coefficient), None


def grl_apply(x: Tensor, coefficient: float = 1.0) -> Tensor:
    """Identity forward; multiplies the incoming gradient by ``-coefficient``."""
    return _GradientReversal.apply(x, float(coefficient))

