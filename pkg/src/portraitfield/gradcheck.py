"""Central finite-difference gradient oracle.

Compares analytic gradients against (f(x+e) - f(x-e)) / 2e coordinate by
coordinate. The graph is evaluated in float64 while the check runs: at the
engine's native float32, the difference quotient carries ~5e-5 of rounding
noise, which swamps small-magnitude gradients and makes a max-relative-error
bound meaningless. Parameters are restored to their original float32 buffers
afterwards.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import ContractError
from .tensor import Tensor

MAX_SAMPLES = 512  # per-tensor cap; a full sweep over conv kernels is infeasible


def grad_check(
    fn: Callable[[], Tensor],
    params: Sequence[Tensor],
    eps: float = 1e-3,
    max_samples: int = MAX_SAMPLES,
    seed: int = 0,
) -> float:
    """Max relative error between analytic and numeric gradients.

    fn rebuilds the scalar loss from the current parameter values on every
    call and must be deterministic. Relative error per coordinate is
    |a - n| / max(|a|, |n|, 1e-8). Tensors smaller than max_samples are
    checked exhaustively, larger ones on a seeded coordinate sample.
    """
    if not (1e-4 <= eps <= 1e-2):
        raise ContractError(f"eps must be in [1e-4, 1e-2], got {eps}")
    params = list(params)
    if not params:
        raise ContractError("grad_check: no parameters given")
    for p in params:
        if not p.requires_grad:
            raise ContractError("grad_check: all checked tensors must have requires_grad")

    rng = np.random.default_rng(seed)
    originals = [p.data for p in params]
    saved_grads = [p.grad for p in params]
    try:
        for p in params:
            p.data = p.data.astype(np.float64)
            p.grad = None

        loss = fn()
        if loss.data.size != 1:
            raise ContractError("grad_check: fn must return a scalar loss")
        loss.backward()
        analytic = [p.grad.copy() if p.grad is not None else np.zeros_like(p.data) for p in params]
        for p in params:
            p.grad = None

        worst = 0.0
        for p, a in zip(params, analytic):
            flat = p.data.reshape(-1)
            a_flat = a.reshape(-1)
            n = flat.size
            if n <= max_samples:
                coords = np.arange(n)
            else:
                coords = rng.choice(n, size=max_samples, replace=False)
            for c in coords:
                orig = flat[c]
                flat[c] = orig + eps
                f_plus = fn().item()
                flat[c] = orig - eps
                f_minus = fn().item()
                flat[c] = orig
                numeric = (f_plus - f_minus) / (2.0 * eps)
                denom = max(abs(a_flat[c]), abs(numeric), 1e-8)
                worst = max(worst, abs(a_flat[c] - numeric) / denom)
        return worst
    finally:
        for p, data, g in zip(params, originals, saved_grads):
            p.data = data
            p.grad = g
