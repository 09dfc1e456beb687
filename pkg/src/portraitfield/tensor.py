"""Minimal reverse-mode differentiable tensor engine.

Row-major float32 arrays with an op-level autodiff graph. The op set is
exactly what the portrait models need: dense matmul (BLAS), 2D convolution
(see `kernels` for the backend split), nearest-neighbor up/down sampling,
elementwise activations, concatenation/reshaping, reductions, softmax, row
embedding lookup and row broadcasting.

Gradients accumulate into `.grad` (call `zero_grads` between steps); graphs
are rebuilt per forward pass. Float64 is tolerated throughout so the
finite-difference oracle can run the same graph at higher precision.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np

from . import kernels
from .errors import ContractError, DimensionError

_FLOAT_TYPES = (np.float32, np.float64)


def _coerce(data) -> np.ndarray:
    arr = np.asarray(data)
    if arr.dtype not in _FLOAT_TYPES:
        arr = arr.astype(np.float32)
    return arr


class Tensor:
    """N-d float array with optional gradient tracking."""

    __slots__ = ("data", "requires_grad", "grad", "_parents", "_backward", "name")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        self.data = _coerce(data)
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable[[np.ndarray], tuple] | None = None
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def __repr__(self) -> str:
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad}{tag})"

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractError(f"item() needs a single-element tensor, got shape {self.data.shape}")
        return float(self.data.reshape(-1)[0])

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    # graph construction -------------------------------------------------

    @staticmethod
    def _from_op(data: np.ndarray, parents: tuple["Tensor", ...], backward) -> "Tensor":
        out = Tensor.__new__(Tensor)
        out.data = data
        out.requires_grad = any(p.requires_grad for p in parents)
        out.grad = None
        out.name = None
        if out.requires_grad:
            out._parents = parents
            out._backward = backward
        else:
            out._parents = ()
            out._backward = None
        return out

    def backward(self) -> None:
        """Reverse-mode pass from a scalar loss.

        Populates `.grad` on every reachable tensor with requires_grad=True,
        accumulating across repeated calls.
        """
        if self.data.size != 1:
            raise ContractError(f"backward() needs a scalar loss, got shape {self.data.shape}")

        topo: list[Tensor] = []
        state: dict[int, int] = {}  # 0 = discovered, 1 = expanded
        stack: list[Tensor] = [self]
        while stack:
            node = stack[-1]
            st = state.get(id(node))
            if st is None:
                state[id(node)] = 0
                for p in node._parents:
                    if p.requires_grad and id(p) not in state:
                        stack.append(p)
            else:
                stack.pop()
                if st == 0:
                    state[id(node)] = 1
                    topo.append(node)

        grads: dict[int, np.ndarray] = {id(self): np.ones_like(self.data)}
        for node in reversed(topo):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node.requires_grad:
                if node.grad is None:
                    node.grad = g.copy()
                else:
                    node.grad = node.grad + g
            if node._backward is None:
                continue
            for parent, pg in zip(node._parents, node._backward(g)):
                if pg is None or not parent.requires_grad:
                    continue
                acc = grads.get(id(parent))
                grads[id(parent)] = pg if acc is None else acc + pg

    # operator sugar ------------------------------------------------------

    def __add__(self, other):
        return add(self, other) if isinstance(other, Tensor) else add_const(self, other)

    def __sub__(self, other):
        return sub(self, other) if isinstance(other, Tensor) else add_const(self, -other)

    def __mul__(self, other):
        return mul(self, other) if isinstance(other, Tensor) else scale(self, other)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return matmul(self, other)


def zero_grads(params: Iterable[Tensor]) -> None:
    for p in params:
        p.grad = None


def _check_same_shape(a: Tensor, b: Tensor, op: str) -> None:
    if a.data.shape != b.data.shape:
        raise DimensionError(f"{op}: shapes {a.data.shape} and {b.data.shape} differ")


# elementwise ------------------------------------------------------------


def add(a: Tensor, b: Tensor) -> Tensor:
    _check_same_shape(a, b, "add")
    return Tensor._from_op(a.data + b.data, (a, b), lambda g: (g, g))


def sub(a: Tensor, b: Tensor) -> Tensor:
    _check_same_shape(a, b, "sub")
    return Tensor._from_op(a.data - b.data, (a, b), lambda g: (g, -g))


def mul(a: Tensor, b: Tensor) -> Tensor:
    _check_same_shape(a, b, "mul")
    return Tensor._from_op(a.data * b.data, (a, b), lambda g: (g * b.data, g * a.data))


def scale(x: Tensor, c: float) -> Tensor:
    c = float(c)
    return Tensor._from_op(x.data * c, (x,), lambda g: (g * c,))


def add_const(x: Tensor, c: float) -> Tensor:
    return Tensor._from_op(x.data + float(c), (x,), lambda g: (g,))


def add_bias(x: Tensor, b: Tensor) -> Tensor:
    """Row bias for (B, D) + (D,) or channel bias for (C, H, W) + (C,)."""
    if b.data.ndim != 1:
        raise DimensionError(f"add_bias: bias must be 1-d, got {b.data.shape}")
    if x.data.ndim == 2:
        if x.data.shape[1] != b.data.shape[0]:
            raise DimensionError(f"add_bias: {x.data.shape} with bias {b.data.shape}")
        return Tensor._from_op(x.data + b.data, (x, b), lambda g: (g, g.sum(axis=0)))
    if x.data.ndim == 3:
        if x.data.shape[0] != b.data.shape[0]:
            raise DimensionError(f"add_bias: {x.data.shape} with bias {b.data.shape}")
        return Tensor._from_op(
            x.data + b.data[:, None, None], (x, b), lambda g: (g, g.sum(axis=(1, 2)))
        )
    raise DimensionError(f"add_bias: unsupported operand rank {x.data.ndim}")


# activations ------------------------------------------------------------

LEAKY_SLOPE = 0.2


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0  # subgradient 0 at the kink
    return Tensor._from_op(np.where(mask, x.data, 0), (x,), lambda g: (np.where(mask, g, 0),))


def leaky_relu(x: Tensor, slope: float = LEAKY_SLOPE) -> Tensor:
    mask = x.data > 0
    out = np.where(mask, x.data, x.data * slope)
    return Tensor._from_op(out, (x,), lambda g: (np.where(mask, g, g * slope),))


def sigmoid(x: Tensor) -> Tensor:
    # exp of a non-positive argument on both branches; never overflows
    ex = np.exp(-np.abs(x.data))
    y = np.where(x.data >= 0, 1.0 / (1.0 + ex), ex / (1.0 + ex)).astype(x.data.dtype)
    return Tensor._from_op(y, (x,), lambda g: (g * y * (1.0 - y),))


def sine(x: Tensor) -> Tensor:
    cos_x = np.cos(x.data)
    return Tensor._from_op(np.sin(x.data), (x,), lambda g: (g * cos_x,))


def cosine(x: Tensor) -> Tensor:
    sin_x = np.sin(x.data)
    return Tensor._from_op(np.cos(x.data), (x,), lambda g: (-g * sin_x,))


_ACTIVATIONS = {
    "relu": relu,
    "leaky_relu": leaky_relu,
    "sigmoid": sigmoid,
    "sine": sine,
}


def activate(x: Tensor, kind: str) -> Tensor:
    try:
        return _ACTIVATIONS[kind](x)
    except KeyError:
        raise ContractError(f"unknown activation {kind!r}") from None


# dense / structured ------------------------------------------------------


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise DimensionError(f"matmul: expected 2-d operands, got {a.data.shape} @ {b.data.shape}")
    if a.data.shape[1] != b.data.shape[0]:
        raise DimensionError(f"matmul: inner dims differ, {a.data.shape} @ {b.data.shape}")

    def backward(g):
        return g @ b.data.T, a.data.T @ g

    return Tensor._from_op(a.data @ b.data, (a, b), backward)


def _pair(v, what: str) -> tuple[int, int]:
    if isinstance(v, int):
        return v, v
    v = tuple(int(i) for i in v)
    if len(v) != 2:
        raise ContractError(f"{what} must be an int or a pair")
    return v


def conv2d(x: Tensor, w: Tensor, stride=1, pad=0) -> Tensor:
    """x: (C_in, H, W), w: (C_out, C_in, kh, kw), zero padding."""
    if x.data.ndim != 3 or w.data.ndim != 4:
        raise DimensionError(f"conv2d: expected (C,H,W) and (O,C,kh,kw), got {x.data.shape}, {w.data.shape}")
    sh, sw = _pair(stride, "stride")
    ph, pw = _pair(pad, "pad")
    if sh < 1 or sw < 1:
        raise ContractError(f"conv2d: stride must be >= 1, got {(sh, sw)}")
    if ph < 0 or pw < 0:
        raise ContractError(f"conv2d: pad must be >= 0, got {(ph, pw)}")
    c_in, h, wdt = x.data.shape
    c_out, c_in_w, kh, kw = w.data.shape
    if c_in_w != c_in:
        raise DimensionError(f"conv2d: input has {c_in} channels, kernel expects {c_in_w}")
    if kh > h + 2 * ph or kw > wdt + 2 * pw:
        raise DimensionError(
            f"conv2d: kernel {(kh, kw)} larger than padded input {(h + 2 * ph, wdt + 2 * pw)}"
        )

    out = kernels.conv2d_forward(x.data, w.data, sh, sw, ph, pw)

    def backward(g):
        gx = kernels.conv2d_backward_input(g, w.data, x.data.shape, sh, sw, ph, pw)
        gw = kernels.conv2d_backward_kernel(g, x.data, kh, kw, sh, sw, ph, pw)
        return gx, gw

    return Tensor._from_op(out, (x, w), backward)


def upsample2x(x: Tensor) -> Tensor:
    """Nearest-neighbor duplication: (C, H, W) -> (C, 2H, 2W)."""
    if x.data.ndim != 3:
        raise DimensionError(f"upsample2x: expected (C,H,W), got {x.data.shape}")
    out = kernels.upsample2x_forward(x.data)
    return Tensor._from_op(out, (x,), lambda g: (kernels.upsample2x_backward(g),))


def downscale(x: Tensor, factor: int) -> Tensor:
    """Area-average pooling by an integer factor on (C, H, W)."""
    if x.data.ndim != 3:
        raise DimensionError(f"downscale: expected (C,H,W), got {x.data.shape}")
    f = int(factor)
    c, h, w = x.data.shape
    if f < 1 or h % f or w % f:
        raise ContractError(f"downscale: factor {f} does not divide {(h, w)}")
    inv = 1.0 / (f * f)
    out = x.data.reshape(c, h // f, f, w // f, f).sum(axis=(2, 4)) * inv

    def backward(g):
        return (np.repeat(np.repeat(g, f, axis=1), f, axis=2) * inv,)

    return Tensor._from_op(out.astype(x.data.dtype, copy=False), (x,), backward)


def concat(parts: Sequence[Tensor], axis: int = 0) -> Tensor:
    if not parts:
        raise ContractError("concat: empty input")
    datas = [p.data for p in parts]
    out = np.concatenate(datas, axis=axis)
    sizes = [d.shape[axis] for d in datas]
    offsets = np.cumsum([0] + sizes)

    def backward(g):
        return tuple(
            g[(slice(None),) * (axis % g.ndim) + (slice(offsets[i], offsets[i + 1]),)]
            for i in range(len(sizes))
        )

    return Tensor._from_op(out, tuple(parts), backward)


def reshape(x: Tensor, shape) -> Tensor:
    orig = x.data.shape
    return Tensor._from_op(x.data.reshape(shape), (x,), lambda g: (g.reshape(orig),))


def transpose2d(x: Tensor) -> Tensor:
    if x.data.ndim != 2:
        raise DimensionError(f"transpose2d: expected 2-d, got {x.data.shape}")
    return Tensor._from_op(np.ascontiguousarray(x.data.T), (x,), lambda g: (g.T,))


def tsum(x: Tensor) -> Tensor:
    return Tensor._from_op(
        np.asarray(x.data.sum(), dtype=x.data.dtype), (x,), lambda g: (np.broadcast_to(g, x.data.shape),)
    )


def tmean(x: Tensor) -> Tensor:
    n = x.data.size
    return Tensor._from_op(
        np.asarray(x.data.mean(), dtype=x.data.dtype),
        (x,),
        lambda g: (np.broadcast_to(g / n, x.data.shape),),
    )


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    z = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(z)
    y = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        dot = (g * y).sum(axis=axis, keepdims=True)
        return (y * (g - dot),)

    return Tensor._from_op(y.astype(x.data.dtype, copy=False), (x,), backward)


def broadcast_rows(x: Tensor, n: int) -> Tensor:
    """(1, D) -> (n, D) by repetition; gradient sums over rows."""
    if x.data.ndim != 2 or x.data.shape[0] != 1:
        raise DimensionError(f"broadcast_rows: expected (1, D), got {x.data.shape}")
    out = np.repeat(x.data, n, axis=0)
    return Tensor._from_op(out, (x,), lambda g: (g.sum(axis=0, keepdims=True),))


def embed_rows(table: Tensor, indices) -> Tensor:
    """Select rows of a (T, D) table; gradient scatters into those rows only."""
    if table.data.ndim != 2:
        raise DimensionError(f"embed_rows: expected (T, D) table, got {table.data.shape}")
    idx = np.atleast_1d(np.asarray(indices, dtype=np.int64))
    if idx.ndim != 1:
        raise ContractError("embed_rows: indices must be scalar or 1-d")
    if idx.size and (idx.min() < 0 or idx.max() >= table.data.shape[0]):
        raise IndexError(f"embed_rows: index out of range for table of {table.data.shape[0]} rows")
    out = table.data[idx].copy()

    def backward(g):
        gt = np.zeros_like(table.data)
        np.add.at(gt, idx, g)
        return (gt,)

    return Tensor._from_op(out, (table,), backward)


def mse(a: Tensor, b: Tensor) -> Tensor:
    """Mean squared error over all elements."""
    d = sub(a, b)
    return tmean(mul(d, d))


def assert_finite(x: Tensor, what: str = "tensor") -> Tensor:
    if not np.isfinite(x.data).all():
        raise ContractError(f"{what} contains non-finite values")
    return x
