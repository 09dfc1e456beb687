"""Audio conditioning pathway.

Per-frame acoustic feature vectors (29-dim, one per video frame) are grouped
into 16-frame windows, encoded to latent codes by a stack of strided
time-axis convolutions, and temporally smoothed by a softmax attention mixer
over 8 consecutive codes. The mixed code replaces the expression vector at
the field MLP input.
"""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .config import ATTN_HALF_WINDOW, AUDIO_FEATURE_DIM, AUDIO_WINDOW
from .decoder import he_uniform
from .errors import ContractError, DimensionError
from .field import glorot


class AudioTrack:
    """(T, 29) float32 per-frame feature matrix, frame-aligned to the video."""

    def __init__(self, features: np.ndarray):
        features = np.asarray(features, dtype=np.float32)
        if features.ndim != 2 or features.shape[1] != AUDIO_FEATURE_DIM:
            raise DimensionError(
                f"audio track must be (T, {AUDIO_FEATURE_DIM}), got {features.shape}"
            )
        if not np.isfinite(features).all():
            raise ContractError("audio track contains non-finite values")
        self.features = features

    def __len__(self) -> int:
        return self.features.shape[0]


def build_window(track: AudioTrack, i: int, w: int = AUDIO_WINDOW) -> np.ndarray:
    """Rows i-w/2 .. i+w/2-1, edge-replicated at track boundaries."""
    t = len(track)
    if not (0 <= i < t):
        raise IndexError(f"frame {i} out of range for a {t}-frame track")
    idx = np.clip(np.arange(i - w // 2, i + w - w // 2), 0, t - 1)
    return track.features[idx]


class AudioEncoder:
    """Strided 1D convolutions collapsing a (16, 29) window to one code."""

    def __init__(self, n_out: int, width: int, rng: np.random.Generator, prefix: str = "audio.enc"):
        self.n_out = n_out
        self.prefix = prefix
        # (channels, kernel, stride) over the time axis: 16 -> 7 -> 2 -> 1
        plan = [
            (AUDIO_FEATURE_DIM, width, 4, 2),
            (width, width, 4, 2),
            (width, n_out, 2, 1),
        ]
        self.conv_w: list[T.Tensor] = []
        self.conv_b: list[T.Tensor] = []
        for i, (c_in, c_out, k, _s) in enumerate(plan):
            self.conv_w.append(
                T.Tensor(
                    he_uniform(rng, (c_out, c_in, k, 1), c_in * k),
                    requires_grad=True,
                    name=f"{prefix}.conv{i}.w",
                )
            )
            self.conv_b.append(
                T.Tensor(np.zeros(c_out, dtype=np.float32), requires_grad=True, name=f"{prefix}.conv{i}.b")
            )
        self.strides = [s for (_, _, _, s) in plan]

    def params(self) -> dict[str, T.Tensor]:
        out: dict[str, T.Tensor] = {}
        for i, (w, b) in enumerate(zip(self.conv_w, self.conv_b)):
            out[f"{self.prefix}.conv{i}.w"] = w
            out[f"{self.prefix}.conv{i}.b"] = b
        return out

    def forward(self, window) -> T.Tensor:
        """(16, 29) window -> (1, n_out) latent code."""
        if not isinstance(window, T.Tensor):
            window = T.Tensor(np.asarray(window, dtype=np.float32))
        if window.data.shape != (AUDIO_WINDOW, AUDIO_FEATURE_DIM):
            raise DimensionError(
                f"audio window must be ({AUDIO_WINDOW}, {AUDIO_FEATURE_DIM}), got {window.data.shape}"
            )
        h = T.reshape(T.transpose2d(window), (AUDIO_FEATURE_DIM, AUDIO_WINDOW, 1))
        last = len(self.conv_w) - 1
        for i, (w, b, s) in enumerate(zip(self.conv_w, self.conv_b, self.strides)):
            h = T.add_bias(T.conv2d(h, w, stride=(s, 1), pad=0), b)
            if i != last:
                h = T.leaky_relu(h)
        return T.reshape(h, (1, self.n_out))


class AttentionMixer:
    """Per-code score MLP + softmax over a 2u-code window."""

    def __init__(self, n_code: int, width: int, rng: np.random.Generator, u: int = ATTN_HALF_WINDOW, prefix: str = "audio.attn"):
        self.u = u
        self.n_code = n_code
        self.prefix = prefix
        self.w0 = T.Tensor(glorot(rng, n_code, width), requires_grad=True, name=f"{prefix}.w0")
        self.b0 = T.Tensor(np.zeros(width, dtype=np.float32), requires_grad=True, name=f"{prefix}.b0")
        self.w1 = T.Tensor(glorot(rng, width, 1), requires_grad=True, name=f"{prefix}.w1")
        self.b1 = T.Tensor(np.zeros(1, dtype=np.float32), requires_grad=True, name=f"{prefix}.b1")

    def params(self) -> dict[str, T.Tensor]:
        return {
            f"{self.prefix}.w0": self.w0,
            f"{self.prefix}.b0": self.b0,
            f"{self.prefix}.w1": self.w1,
            f"{self.prefix}.b1": self.b1,
        }

    def weights(self, codes: T.Tensor) -> T.Tensor:
        """(2u, n_code) -> (2u, 1) nonnegative weights summing to 1."""
        if codes.data.shape != (2 * self.u, self.n_code):
            raise ContractError(
                f"mixer expects exactly {2 * self.u} codes of dim {self.n_code}, got {codes.data.shape}"
            )
        h = T.relu(T.add_bias(T.matmul(codes, self.w0), self.b0))
        logits = T.add_bias(T.matmul(h, self.w1), self.b1)
        return T.softmax(logits, axis=0)

    def mix(self, codes: T.Tensor) -> T.Tensor:
        """Convex combination of codes -> (1, n_code)."""
        w = self.weights(codes)
        return T.matmul(T.transpose2d(w), codes)


def mixed_code(
    encoder: AudioEncoder,
    mixer: AttentionMixer,
    track: AudioTrack,
    i: int,
    code_cache: dict[int, T.Tensor] | None = None,
) -> T.Tensor:
    """Full per-frame pathway: windows -> codes a_{i-u+1..i+u} -> mixed code.

    Code indices past the track ends are clamped (consistent with window
    edge replication). code_cache, when given, memoizes per-frame codes;
    only valid while encoder parameters are fixed (inference).
    """
    u = mixer.u
    t = len(track)
    if not (0 <= i < t):
        raise IndexError(f"frame {i} out of range for a {t}-frame track")
    codes = []
    for j in range(i - u + 1, i + u + 1):
        jc = min(max(j, 0), t - 1)
        if code_cache is not None and jc in code_cache:
            codes.append(code_cache[jc])
            continue
        code = encoder.forward(build_window(track, jc))
        if code_cache is not None:
            code_cache[jc] = code
        codes.append(code)
    return mixer.mix(T.concat(codes, axis=0))
