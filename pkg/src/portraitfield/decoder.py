"""Convolutional upsampling decoder: feature map -> full-resolution frame.

Each stage doubles the spatial size (nearest-neighbor) and applies a 3x3
convolution with leaky-relu; a final 3x3 convolution and sigmoid produce
RGB in [0, 1]. Nearest-neighbor + conv avoids the checkerboard artifacts of
transposed convolutions. Channels halve per stage from the feature width
down to a floor of 16.
"""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .errors import DimensionError


def he_uniform(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    s = np.sqrt(6.0 / fan_in)
    return rng.uniform(-s, s, size=shape).astype(np.float32)


def stage_channels(n_in: int, stages: int, floor: int = 16) -> list[int]:
    chans = []
    c = n_in
    for _ in range(stages):
        c = max(c // 2, floor)
        chans.append(c)
    return chans


class DecoderNet:
    def __init__(self, n_in: int, stages: int, rng: np.random.Generator, prefix: str = "decoder"):
        self.n_in = n_in
        self.stages = stages
        self.prefix = prefix
        self.conv_w: list[T.Tensor] = []
        self.conv_b: list[T.Tensor] = []
        c_prev = n_in
        for i, c_out in enumerate(stage_channels(n_in, stages)):
            w = T.Tensor(
                he_uniform(rng, (c_out, c_prev, 3, 3), c_prev * 9),
                requires_grad=True,
                name=f"{prefix}.conv{i}.w",
            )
            b = T.Tensor(np.zeros(c_out, dtype=np.float32), requires_grad=True, name=f"{prefix}.conv{i}.b")
            self.conv_w.append(w)
            self.conv_b.append(b)
            c_prev = c_out
        self.out_w = T.Tensor(
            he_uniform(rng, (3, c_prev, 3, 3), c_prev * 9), requires_grad=True, name=f"{prefix}.out.w"
        )
        self.out_b = T.Tensor(np.zeros(3, dtype=np.float32), requires_grad=True, name=f"{prefix}.out.b")

    def params(self) -> dict[str, T.Tensor]:
        out: dict[str, T.Tensor] = {}
        for i, (w, b) in enumerate(zip(self.conv_w, self.conv_b)):
            out[f"{self.prefix}.conv{i}.w"] = w
            out[f"{self.prefix}.conv{i}.b"] = b
        out[f"{self.prefix}.out.w"] = self.out_w
        out[f"{self.prefix}.out.b"] = self.out_b
        return out

    def forward(self, features: T.Tensor) -> T.Tensor:
        """(n_in, H_f, W_f) -> (3, H_f * 2^S, W_f * 2^S), values in [0, 1]."""
        if features.data.ndim != 3 or features.data.shape[0] != self.n_in:
            raise DimensionError(
                f"decoder expects ({self.n_in}, H, W) features, got {features.data.shape}"
            )
        h = features
        for w, b in zip(self.conv_w, self.conv_b):
            h = T.upsample2x(h)
            h = T.leaky_relu(T.add_bias(T.conv2d(h, w, stride=1, pad=1), b))
        return T.sigmoid(T.add_bias(T.conv2d(h, self.out_w, stride=1, pad=1), self.out_b))
