"""Model assembly: variant-gated networks plus the per-frame latent table."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .audio import AttentionMixer, AudioEncoder, AudioTrack, mixed_code
from .config import ModelConfig
from .decoder import DecoderNet
from .encoding import PoseNormalization
from .errors import ContractError, DimensionError, ModeError
from .field import CoordMLP, FieldMaps, GridEvaluator, grid_maps


@dataclass
class ConditioningInput:
    """Per-frame driving signal.

    cond carries the expression blendshape weights in expr mode and the
    mixed audio code in audio mode; exactly one interpretation is active per
    model. gaze may be None for variants that do not consume it.
    """

    pose: np.ndarray
    cond: np.ndarray
    gaze: np.ndarray | None = None

    def validated(self, n_cond: int) -> "ConditioningInput":
        pose = np.asarray(self.pose, dtype=np.float32).reshape(-1)
        cond = np.asarray(self.cond, dtype=np.float32).reshape(-1)
        if pose.shape[0] != 6:
            raise DimensionError(f"pose must have 6 components, got {pose.shape[0]}")
        if cond.shape[0] != n_cond:
            raise DimensionError(f"conditioning vector must have {n_cond} components, got {cond.shape[0]}")
        gaze = self.gaze
        if gaze is not None:
            gaze = np.asarray(gaze, dtype=np.float32).reshape(-1)
            if gaze.shape[0] != 2:
                raise DimensionError(f"gaze must have 2 components, got {gaze.shape[0]}")
        for name, v in (("pose", pose), ("cond", cond), ("gaze", gaze)):
            if v is not None and not np.isfinite(v).all():
                raise ContractError(f"{name} contains non-finite values")
        return ConditioningInput(pose, cond, gaze)


class LatentTable:
    """One learnable vector per training frame; mean cached for held-out use."""

    def __init__(self, n_frames: int, dim: int, rng: np.random.Generator, prefix: str = "latents"):
        self.prefix = prefix
        self.table = T.Tensor(
            (0.01 * rng.standard_normal((n_frames, dim))).astype(np.float32),
            requires_grad=True,
            name=f"{prefix}.table",
        )

    def row(self, i: int) -> T.Tensor:
        return T.embed_rows(self.table, i)

    def mean(self) -> np.ndarray:
        return self.table.data.mean(axis=0)

    def params(self) -> dict[str, T.Tensor]:
        return {f"{self.prefix}.table": self.table}


class FrameFeatureTable:
    """Variant B: a learned feature tensor per training frame (no MLP)."""

    def __init__(self, n_frames: int, n_features: int, h: int, w: int, rng: np.random.Generator, prefix: str = "frames"):
        self.prefix = prefix
        self.n_features, self.h, self.w = n_features, h, w
        self.table = T.Tensor(
            (0.1 * rng.standard_normal((n_frames, n_features * h * w))).astype(np.float32),
            requires_grad=True,
            name=f"{prefix}.table",
        )

    def features(self, i: int | None) -> T.Tensor:
        if i is None:
            row = T.Tensor(self.table.data.mean(axis=0, keepdims=True))
        else:
            row = T.embed_rows(self.table, i)
        return T.reshape(row, (self.n_features, self.h, self.w))

    def params(self) -> dict[str, T.Tensor]:
        return {f"{self.prefix}.table": self.table}


class PortraitModel:
    """All networks of one variant plus rendering entry points."""

    def __init__(
        self,
        cfg: ModelConfig,
        n_train_frames: int,
        norm: PoseNormalization,
        seed: int = 0,
    ):
        self.cfg = cfg
        self.norm = norm
        self.n_train_frames = n_train_frames
        rng = np.random.default_rng(seed)

        self.field: CoordMLP | None = None
        self.evaluator: GridEvaluator | None = None
        if cfg.uses_field:
            n_features = cfg.n_features if cfg.uses_decoder else 0
            color = cfg.uses_color_head or cfg.variant == "A"
            self.field = CoordMLP(
                cfg.field_input_dim, cfg.trunk_depth, cfg.trunk_width, n_features, color, rng
            )
            self.evaluator = GridEvaluator(self.field, cfg.enc, norm)

        self.decoder: DecoderNet | None = None
        if cfg.uses_decoder:
            self.decoder = DecoderNet(cfg.n_features, cfg.stages, rng)

        self.latents: LatentTable | None = None
        if cfg.uses_latents:
            self.latents = LatentTable(n_train_frames, cfg.n_latent, rng)
        self.mean_latent: np.ndarray | None = None

        self.frames: FrameFeatureTable | None = None
        if cfg.variant == "B":
            self.frames = FrameFeatureTable(
                n_train_frames, cfg.n_features, cfg.grid_height, cfg.grid_width, rng
            )

        self.audio_encoder: AudioEncoder | None = None
        self.audio_mixer: AttentionMixer | None = None
        if cfg.mode == "audio":
            self.audio_encoder = AudioEncoder(cfg.n_cond, cfg.audio_width, rng)
            self.audio_mixer = AttentionMixer(cfg.n_cond, cfg.attn_width, rng)

    # parameters ----------------------------------------------------------

    def params(self) -> dict[str, T.Tensor]:
        out: dict[str, T.Tensor] = {}
        for part in (self.field, self.decoder, self.latents, self.frames, self.audio_encoder, self.audio_mixer):
            if part is not None:
                out.update(part.params())
        return out

    def refresh_mean_latent(self) -> None:
        if self.latents is not None:
            self.mean_latent = self.latents.mean()

    # conditioning helpers --------------------------------------------------

    def latent_for(self, frame_index: int | None) -> T.Tensor | None:
        if not self.cfg.uses_latents:
            return None
        if frame_index is not None:
            return self.latents.row(frame_index)
        mean = self.mean_latent if self.mean_latent is not None else self.latents.mean()
        return T.Tensor(mean.reshape(1, -1))

    def audio_code(self, track: AudioTrack, i: int, code_cache: dict | None = None) -> T.Tensor:
        if self.audio_encoder is None:
            raise ModeError("model was not built in audio mode")
        return mixed_code(self.audio_encoder, self.audio_mixer, track, i, code_cache)

    # forward paths ---------------------------------------------------------

    def _cond_tensor(self, cond) -> T.Tensor:
        if isinstance(cond, T.Tensor):
            return cond if cond.data.ndim == 2 else T.reshape(cond, (1, -1))
        arr = np.asarray(cond, dtype=np.float32).reshape(1, -1)
        if arr.shape[1] != self.cfg.n_cond:
            raise DimensionError(f"conditioning vector must have {self.cfg.n_cond} components, got {arr.shape[1]}")
        return T.Tensor(arr)

    def field_maps(self, cond: ConditioningInput, latent: T.Tensor | None, grid: tuple[int, int] | None = None) -> FieldMaps:
        if self.evaluator is None:
            raise ModeError(f"variant {self.cfg.variant} has no field MLP")
        h, w = grid if grid is not None else (self.cfg.grid_height, self.cfg.grid_width)
        gaze = cond.gaze if self.cfg.uses_gaze else None
        if self.cfg.uses_gaze and gaze is None:
            raise ModeError("variant F requires a gaze input")
        return grid_maps(self.evaluator, h, w, cond.pose, gaze, self._cond_tensor(cond.cond), latent)

    def render(self, cond: ConditioningInput, frame_index: int | None = None, latent: T.Tensor | None = None) -> T.Tensor:
        """Full forward pass -> (3, H, W) in [0, 1]; keeps the graph."""
        cfg = self.cfg
        if cfg.variant == "A":
            maps = self.field_maps(cond, None, grid=(cfg.height, cfg.width))
            return maps.colors
        if cfg.variant == "B":
            return self.decoder.forward(self.frames.features(frame_index))
        if latent is None:
            latent = self.latent_for(frame_index)
        maps = self.field_maps(cond, latent)
        return self.decoder.forward(maps.features)

    def render_np(self, cond: ConditioningInput, frame_index: int | None = None) -> np.ndarray:
        """(H, W, 3) float32 in [0, 1], detached."""
        img = self.render(cond.validated(self.cfg.n_cond), frame_index=frame_index)
        return np.clip(np.transpose(img.data, (1, 2, 0)), 0.0, 1.0).astype(np.float32)
