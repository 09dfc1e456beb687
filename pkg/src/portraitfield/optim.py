"""Adam optimizer with bias correction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError
from .tensor import Tensor


@dataclass
class AdamState:
    lr: float = 5e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)

    def ensure(self, params: list[Tensor]) -> None:
        if not self.m:
            self.m = [np.zeros_like(p.data, dtype=np.float32) for p in params]
            self.v = [np.zeros_like(p.data, dtype=np.float32) for p in params]
        if len(self.m) != len(params):
            raise DimensionError(f"optimizer tracks {len(self.m)} tensors, got {len(params)}")


def adam_step(params: list[Tensor], grads: list[np.ndarray], state: AdamState, lr: float | None = None) -> AdamState:
    """One bias-corrected update; mutates params and state in place."""
    state.ensure(params)
    if len(grads) != len(params):
        raise DimensionError(f"{len(params)} params but {len(grads)} grads")
    state.step += 1
    t = state.step
    b1, b2 = state.beta1, state.beta2
    lr_t = state.lr if lr is None else lr
    c1 = 1.0 - b1**t
    c2 = 1.0 - b2**t
    for i, (p, g) in enumerate(zip(params, grads)):
        if g.shape != p.data.shape:
            raise DimensionError(f"grad shape {g.shape} != param shape {p.data.shape}")
        m = state.m[i]
        v = state.v[i]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * np.square(g)
        p.data -= (lr_t / c1) * m / (np.sqrt(v / c2) + state.eps)
    return state


class Adam:
    """Stateful wrapper binding an AdamState to a fixed parameter list."""

    def __init__(self, params: list[Tensor], lr: float = 5e-4, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = list(params)
        self.state = AdamState(lr=lr, beta1=beta1, beta2=beta2, eps=eps)
        self.state.ensure(self.params)

    def step(self, lr: float | None = None) -> None:
        grads = [p.grad if p.grad is not None else np.zeros_like(p.data) for p in self.params]
        adam_step(self.params, grads, self.state, lr=lr)

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None


def cosine_lr(base_lr: float, step: int, total_steps: int, floor_ratio: float = 0.05) -> float:
    """Cosine decay from base_lr to floor_ratio * base_lr over total_steps."""
    if total_steps <= 0:
        return base_lr
    t = min(max(step, 0), total_steps) / total_steps
    lo = base_lr * floor_ratio
    return lo + (base_lr - lo) * 0.5 * (1.0 + np.cos(np.pi * t))
