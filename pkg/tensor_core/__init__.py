"""Aritmética de tensores (n, c, h, w) y capas diferenciables."""

from tensor_core.tensor import ConvSpec, LayerCache, Tensor
from tensor_core.layers import (
    concat_channels,
    conv2d,
    conv2d_backward,
    conv_transpose2d,
    conv_transpose2d_backward,
    dilate_kernel,
    mse_loss,
    relu,
    relu_backward,
    split_channels_backward,
)
from tensor_core.gradcheck import gradcheck

__all__ = [
    "ConvSpec", "LayerCache", "Tensor",
    "concat_channels", "conv2d", "conv2d_backward", "conv_transpose2d",
    "conv_transpose2d_backward", "dilate_kernel", "mse_loss", "relu",
    "relu_backward", "split_channels_backward", "gradcheck",
]
