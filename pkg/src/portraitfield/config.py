"""Model architecture configuration and the ablation variant ladder.

Variants:
  A  color-only coordinate MLP at full output resolution
  B  per-frame learned feature tensor feeding the decoder (no MLP)
  C  coordinate MLP + decoder
  D  C + per-frame latent codes
  E  D + side color head with its low-resolution reconstruction loss
  F  E + gaze input (full model)

Audio-driven models are variant F with the expression vector replaced by the
mixed audio code.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from .encoding import EncodingConfig, encoded_length
from .errors import ValidationError

VARIANTS = ("A", "B", "C", "D", "E", "F")

AUDIO_FEATURE_DIM = 29  # per-frame acoustic feature width
AUDIO_WINDOW = 16  # frames per encoder window
ATTN_HALF_WINDOW = 4  # u; the mixer sees 2u codes


@dataclass
class ModelConfig:
    variant: str = "F"
    mode: str = "expr"  # expr | audio
    height: int = 64
    width: int = 64
    stages: int = 3  # decoder upsampling stages; field grid is H/2^S x W/2^S
    trunk_depth: int = 4
    trunk_width: int = 128
    n_features: int = 64
    n_cond: int = 8  # expression dim (expr mode) or audio code dim (audio mode)
    n_latent: int = 32
    enc: EncodingConfig = field(default_factory=EncodingConfig)
    audio_width: int = 32  # hidden channels of the window encoder
    attn_width: int = 32  # hidden width of the attention score net

    def __post_init__(self):
        if isinstance(self.enc, dict):
            self.enc = EncodingConfig(**self.enc)
        if self.variant not in VARIANTS:
            raise ValidationError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.mode not in ("expr", "audio"):
            raise ValidationError(f"mode must be expr|audio, got {self.mode!r}")
        if self.mode == "audio" and self.variant != "F":
            raise ValidationError("audio mode requires the full model (variant F)")
        if self.variant != "A":
            div = 1 << self.stages
            if self.height % div or self.width % div:
                raise ValidationError(
                    f"resolution {self.height}x{self.width} not divisible by 2^{self.stages}"
                )
        if self.height < 1 or self.width < 1:
            raise ValidationError("resolution must be positive")

    # variant gating ------------------------------------------------------

    @property
    def uses_field(self) -> bool:
        return self.variant != "B"

    @property
    def uses_decoder(self) -> bool:
        return self.variant != "A"

    @property
    def uses_latents(self) -> bool:
        return self.variant in ("D", "E", "F")

    @property
    def uses_gaze(self) -> bool:
        return self.variant == "F"

    @property
    def uses_color_head(self) -> bool:
        return self.variant in ("E", "F")

    @property
    def grid_height(self) -> int:
        return self.height if self.variant == "A" else self.height >> self.stages

    @property
    def grid_width(self) -> int:
        return self.width if self.variant == "A" else self.width >> self.stages

    @property
    def effective_latent(self) -> int:
        return self.n_latent if self.uses_latents else 0

    @property
    def field_input_dim(self) -> int:
        return encoded_length(self.enc, self.n_cond, self.effective_latent, with_gaze=self.uses_gaze)

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(d: dict) -> "ModelConfig":
        d = dict(d)
        if "enc" in d and isinstance(d["enc"], dict):
            d["enc"] = EncodingConfig(**d["enc"])
        return ModelConfig(**d)


def preset(name: str, **overrides) -> ModelConfig:
    """Named architecture presets.

    desk: the default working scale (4x128 trunk, 64 features, 3 stages).
    tiny: gradient-oracle scale (4x4 grid, 2 stages, 16x16 output).
    full: the 8x256 trunk with a skip connection, for larger scenes.
    """
    if name == "desk":
        base = dict(trunk_depth=4, trunk_width=128, n_features=64, stages=3)
    elif name == "tiny":
        base = dict(
            height=16,
            width=16,
            trunk_depth=4,
            trunk_width=128,
            n_features=64,
            stages=2,
            enc=EncodingConfig(n_coord=4, n_pose=2, n_gaze=2),
        )
    elif name == "full":
        base = dict(trunk_depth=8, trunk_width=256, n_features=64, stages=3)
    else:
        raise ValidationError(f"unknown preset {name!r}")
    base.update(overrides)
    return ModelConfig(**base)
