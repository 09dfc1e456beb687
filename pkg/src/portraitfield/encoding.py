"""Sinusoidal lifting of low-dimensional inputs and conditioning assembly.

A scalar x maps to [x, sin(2*pi*x), cos(2*pi*x), ..., sin(2^N*pi*x),
cos(2^N*pi*x)], length 2N+1 (N frequency pairs at 2^k*pi, k=1..N). The full
conditioning vector for the field MLP is the concatenation of the lifted
coordinates, pose and gaze with the raw expression-or-audio code and the raw
per-frame latent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import stats
from . import tensor as T
from .errors import ContractError


@dataclass(frozen=True)
class EncodingConfig:
    n_coord: int = 10  # frequency count for x, y
    n_pose: int = 4
    n_gaze: int = 4

    def __post_init__(self):
        for f in (self.n_coord, self.n_pose, self.n_gaze):
            if f < 0:
                raise ContractError("frequency counts must be >= 0")


def frequencies(n: int) -> np.ndarray:
    """Angular frequencies 2^k * pi for k = 1..n."""
    return (2.0 ** np.arange(1, n + 1)) * np.pi


def encoded_scalar_length(n: int) -> int:
    return 2 * n + 1


def positional_encode(x: float, n: int) -> np.ndarray:
    """Lift one scalar; float64 so it tracks the closed form to ~1e-15."""
    if not np.isfinite(x):
        raise ContractError("positional_encode: input must be finite")
    out = np.empty(2 * n + 1, dtype=np.float64)
    out[0] = x
    f = frequencies(n) * float(x)
    out[1::2] = np.sin(f)
    out[2::2] = np.cos(f)
    return out


def encode_array(values: np.ndarray, n: int) -> np.ndarray:
    """Lift each column entry of a (B,) array -> (B, 2n+1), float32."""
    v = np.asarray(values, dtype=np.float32).reshape(-1, 1)
    if n == 0:
        return v
    f = v * frequencies(n).astype(np.float32)
    out = np.empty((v.shape[0], 2 * n + 1), dtype=np.float32)
    out[:, 0:1] = v
    out[:, 1::2] = np.sin(f)
    out[:, 2::2] = np.cos(f)
    return out


def encode_column(x: T.Tensor, n: int) -> T.Tensor:
    """Differentiable lift of a (B, 1) tensor -> (B, 2n+1)."""
    parts = [x]
    for f in frequencies(n):
        scaled = T.scale(x, float(f))
        parts.append(T.sine(scaled))
        parts.append(T.cosine(scaled))
    return T.concat(parts, axis=1)


def encoded_length(cfg: EncodingConfig, n_cond: int, n_latent: int, with_gaze: bool = True) -> int:
    """Input width of the field MLP for a given configuration."""
    length = 2 * encoded_scalar_length(cfg.n_coord) + 6 * encoded_scalar_length(cfg.n_pose)
    if with_gaze:
        length += 2 * encoded_scalar_length(cfg.n_gaze)
    return length + n_cond + n_latent


@dataclass(frozen=True)
class PoseNormalization:
    """Affine map taking raw pose translations into [-1, 1].

    Rotation components (Euler angles, radians) pass through unchanged;
    the sinusoid frequencies presume order-1 inputs, which translations in
    scene units are not.
    """

    center: tuple[float, float, float] = (0.0, 0.0, 0.0)
    half_range: tuple[float, float, float] = (1.0, 1.0, 1.0)

    @staticmethod
    def from_track(poses: np.ndarray) -> "PoseNormalization":
        t = np.asarray(poses)[:, 3:6]
        lo, hi = t.min(axis=0), t.max(axis=0)
        center = (lo + hi) / 2.0
        half = np.maximum((hi - lo) / 2.0, 1e-6)
        return PoseNormalization(tuple(map(float, center)), tuple(map(float, half)))

    def apply(self, pose: np.ndarray) -> np.ndarray:
        pose = np.asarray(pose, dtype=np.float32)
        out = pose.copy()
        out[3:6] = (pose[3:6] - np.asarray(self.center, dtype=np.float32)) / np.asarray(
            self.half_range, dtype=np.float32
        )
        return out


def coordinate_grid(h: int, w: int) -> tuple[np.ndarray, np.ndarray]:
    """Pixel-center coordinates in (0, 1): x=(j+0.5)/w, y=(i+0.5)/h, row-major."""
    ys = (np.arange(h, dtype=np.float32) + 0.5) / h
    xs = (np.arange(w, dtype=np.float32) + 0.5) / w
    yy, xx = np.meshgrid(ys, xs, indexing="ij")
    return xx.reshape(-1), yy.reshape(-1)


def encode_grid_coords(h: int, w: int, n: int) -> np.ndarray:
    """Lifted coordinate block for an h x w grid: (h*w, 2*(2n+1)), float32."""
    stats.bump("coord_block_builds")
    xs, ys = coordinate_grid(h, w)
    return np.concatenate([encode_array(xs, n), encode_array(ys, n)], axis=1)


def encode_nonspatial(
    pose: np.ndarray,
    gaze: np.ndarray | None,
    cond: T.Tensor,
    latent: T.Tensor | None,
    cfg: EncodingConfig,
    norm: PoseNormalization,
) -> T.Tensor:
    """Per-frame conditioning block (1, L_ns); computed once per frame.

    cond (expression or audio code) and latent stay in the graph so
    gradients reach the audio networks and the latent table; pose and gaze
    are data and enter as constants.
    """
    stats.bump("nonspatial_encodes")
    pose = np.asarray(pose, dtype=np.float32).reshape(-1)
    if pose.shape[0] != 6:
        raise ContractError(f"pose must have 6 components, got {pose.shape[0]}")
    pn = norm.apply(pose)
    blocks: list[T.Tensor] = [
        T.Tensor(np.concatenate([encode_array(pn[i : i + 1], cfg.n_pose) for i in range(6)], axis=1))
    ]
    if gaze is not None:
        gaze = np.asarray(gaze, dtype=np.float32).reshape(-1)
        if gaze.shape[0] != 2:
            raise ContractError(f"gaze must have 2 components, got {gaze.shape[0]}")
        blocks.append(
            T.Tensor(np.concatenate([encode_array(gaze[i : i + 1], cfg.n_gaze) for i in range(2)], axis=1))
        )
    if cond.data.ndim == 1:
        cond = T.reshape(cond, (1, -1))
    blocks.append(cond)
    if latent is not None:
        if latent.data.ndim == 1:
            latent = T.reshape(latent, (1, -1))
        blocks.append(latent)
    return T.concat(blocks, axis=1)


def encode_conditioning(
    coord: np.ndarray,
    pose: np.ndarray,
    gaze: np.ndarray | None,
    cond: np.ndarray | T.Tensor,
    latent: np.ndarray | T.Tensor | None,
    cfg: EncodingConfig,
    norm: PoseNormalization | None = None,
) -> T.Tensor:
    """Full conditioning vector (1, L) for a single spatial position."""
    coord = np.asarray(coord, dtype=np.float32).reshape(-1)
    if coord.shape[0] != 2:
        raise ContractError(f"coord must have 2 components, got {coord.shape[0]}")
    norm = norm or PoseNormalization()
    coord_block = T.Tensor(
        np.concatenate(
            [encode_array(coord[0:1], cfg.n_coord), encode_array(coord[1:2], cfg.n_coord)], axis=1
        )
    )
    if not isinstance(cond, T.Tensor):
        cond = T.Tensor(np.asarray(cond, dtype=np.float32).reshape(1, -1))
    if latent is not None and not isinstance(latent, T.Tensor):
        latent = T.Tensor(np.asarray(latent, dtype=np.float32).reshape(1, -1))
    ns = encode_nonspatial(pose, gaze, cond, latent, cfg, norm)
    return T.concat([coord_block, ns], axis=1)
