"""Conditioned coordinate MLP: per-position feature and color prediction.

The trunk is a relu MLP over the encoded conditioning vector with one skip
concatenation of its input at the middle layer. Two heads share the trunk:
a linear feature head (decoder input) and a sigmoid color head supervised at
grid resolution. The color-only baseline reuses the same trunk with the
feature head absent and runs on the full-resolution coordinate grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import stats
from . import tensor as T
from .encoding import EncodingConfig, PoseNormalization, encode_grid_coords, encode_nonspatial
from .errors import ContractError, DimensionError


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    s = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-s, s, size=(fan_in, fan_out)).astype(np.float32)


@dataclass
class FieldMaps:
    """Grid outputs of the MLP: features (n_f, H_f, W_f) and colors (3, H_f, W_f)."""

    features: T.Tensor | None
    colors: T.Tensor | None


class CoordMLP:
    """Shared-trunk MLP with optional feature and color heads."""

    def __init__(
        self,
        in_dim: int,
        depth: int,
        width: int,
        n_features: int,
        color_head: bool,
        rng: np.random.Generator,
        prefix: str = "field",
    ):
        if depth < 1:
            raise ContractError("trunk depth must be >= 1")
        self.in_dim = in_dim
        self.depth = depth
        self.width = width
        self.n_features = n_features
        self.color_head = color_head
        self.skip_at = depth // 2 if depth >= 3 else None  # re-inject encoded input here
        self.prefix = prefix

        self.weights: list[T.Tensor] = []
        self.biases: list[T.Tensor] = []
        d = in_dim
        for i in range(depth):
            if self.skip_at is not None and i == self.skip_at:
                d += in_dim
            w = T.Tensor(glorot(rng, d, width), requires_grad=True, name=f"{prefix}.w{i}")
            b = T.Tensor(np.zeros(width, dtype=np.float32), requires_grad=True, name=f"{prefix}.b{i}")
            self.weights.append(w)
            self.biases.append(b)
            d = width
        self.feat_w = self.feat_b = None
        if n_features > 0:
            self.feat_w = T.Tensor(glorot(rng, width, n_features), requires_grad=True, name=f"{prefix}.feat_w")
            self.feat_b = T.Tensor(np.zeros(n_features, dtype=np.float32), requires_grad=True, name=f"{prefix}.feat_b")
        self.color_w = self.color_b = None
        if color_head:
            self.color_w = T.Tensor(glorot(rng, width, 3), requires_grad=True, name=f"{prefix}.color_w")
            self.color_b = T.Tensor(np.zeros(3, dtype=np.float32), requires_grad=True, name=f"{prefix}.color_b")

    def params(self) -> dict[str, T.Tensor]:
        out: dict[str, T.Tensor] = {}
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            out[f"{self.prefix}.w{i}"] = w
            out[f"{self.prefix}.b{i}"] = b
        if self.feat_w is not None:
            out[f"{self.prefix}.feat_w"] = self.feat_w
            out[f"{self.prefix}.feat_b"] = self.feat_b
        if self.color_w is not None:
            out[f"{self.prefix}.color_w"] = self.color_w
            out[f"{self.prefix}.color_b"] = self.color_b
        return out

    def forward(self, encoded: T.Tensor) -> tuple[T.Tensor | None, T.Tensor | None]:
        """(B, in_dim) -> (features (B, n_f) | None, colors (B, 3) | None)."""
        if encoded.data.ndim != 2 or encoded.data.shape[1] != self.in_dim:
            raise DimensionError(
                f"encoded input has shape {encoded.data.shape}, model expects (B, {self.in_dim})"
            )
        h = encoded
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if self.skip_at is not None and i == self.skip_at:
                h = T.concat([h, encoded], axis=1)
            h = T.relu(T.add_bias(T.matmul(h, w), b))
        f = c = None
        if self.feat_w is not None:
            f = T.add_bias(T.matmul(h, self.feat_w), self.feat_b)
        if self.color_w is not None:
            c = T.sigmoid(T.add_bias(T.matmul(h, self.color_w), self.color_b))
        return f, c


class GridEvaluator:
    """Evaluates a CoordMLP over a pixel-center grid.

    The lifted coordinate block is cached per grid size (it does not depend
    on the frame); the non-spatial block is encoded once per call and
    broadcast across all grid cells.
    """

    def __init__(self, mlp: CoordMLP, enc: EncodingConfig, norm: PoseNormalization):
        self.mlp = mlp
        self.enc = enc
        self.norm = norm
        self._coord_cache: dict[tuple[int, int], np.ndarray] = {}

    def coord_block(self, h: int, w: int) -> np.ndarray:
        key = (h, w)
        if key not in self._coord_cache:
            self._coord_cache[key] = encode_grid_coords(h, w, self.enc.n_coord)
        return self._coord_cache[key]

    def evaluate(
        self,
        h: int,
        w: int,
        pose: np.ndarray,
        gaze: np.ndarray | None,
        cond: T.Tensor,
        latent: T.Tensor | None,
    ) -> tuple[T.Tensor | None, T.Tensor | None]:
        """Returns per-pixel (features (B, n_f), colors (B, 3)), B = h*w row-major."""
        stats.bump("grid_evaluations")
        coords = T.Tensor(self.coord_block(h, w))
        nonspatial = encode_nonspatial(pose, gaze, cond, latent, self.enc, self.norm)
        batch = T.concat([coords, T.broadcast_rows(nonspatial, h * w)], axis=1)
        return self.mlp.forward(batch)


def rows_to_maps(rows: T.Tensor, h: int, w: int) -> T.Tensor:
    """(h*w, C) row-major -> (C, h, w)."""
    c = rows.data.shape[1]
    return T.reshape(T.transpose2d(rows), (c, h, w))


def grid_maps(
    evaluator: GridEvaluator,
    h: int,
    w: int,
    pose: np.ndarray,
    gaze: np.ndarray | None,
    cond: T.Tensor,
    latent: T.Tensor | None,
) -> FieldMaps:
    f, c = evaluator.evaluate(h, w, pose, gaze, cond, latent)
    return FieldMaps(
        features=rows_to_maps(f, h, w) if f is not None else None,
        colors=rows_to_maps(c, h, w) if c is not None else None,
    )
