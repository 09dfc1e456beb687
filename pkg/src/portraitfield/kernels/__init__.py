"""Kernel backend selection.

The compiled extension is preferred when importable; otherwise the numpy
fallback is used. PORTRAITFIELD_KERNELS={auto,accel,numpy} overrides the
choice (requesting "accel" without the extension built is an error).

Float64 arrays always take the numpy path: the extension is float32-only,
and float64 only occurs inside the finite-difference gradient oracle.
"""

import importlib
import os

import numpy as np

from . import numpy_backend

_accel = None
_mode = os.environ.get("PORTRAITFIELD_KERNELS", "auto").lower()
if _mode not in ("auto", "accel", "numpy"):
    raise ValueError(f"PORTRAITFIELD_KERNELS must be auto|accel|numpy, got {_mode!r}")

if _mode in ("auto", "accel"):
    try:
        _accel = importlib.import_module(__name__ + "._accel")
    except ImportError:
        if _mode == "accel":
            raise ImportError(
                "PORTRAITFIELD_KERNELS=accel but the compiled extension is not "
                "built; reinstall with the extension or use auto/numpy"
            ) from None

_active = _accel if _accel is not None else numpy_backend

BACKEND = _active.NAME
HAS_ACCEL = _accel is not None


def backend_for(*dtypes) -> object:
    if _active is numpy_backend or any(d == np.float64 for d in dtypes):
        return numpy_backend
    return _active


def get_backend(name: str):
    """Explicit backend lookup, used by the backend-comparison benchmark."""
    if name == "numpy":
        return numpy_backend
    if name == "accel":
        if _accel is None:
            raise ValueError("compiled kernel extension is not available")
        return _accel
    raise ValueError(f"unknown kernel backend {name!r}")


def set_num_threads(n: int) -> None:
    _active.set_num_threads(n)


def conv2d_forward(x, w, sh, sw, ph, pw):
    return backend_for(x.dtype, w.dtype).conv2d_forward(x, w, sh, sw, ph, pw)


def conv2d_backward_input(gy, w, x_shape, sh, sw, ph, pw):
    return backend_for(gy.dtype, w.dtype).conv2d_backward_input(gy, w, x_shape, sh, sw, ph, pw)


def conv2d_backward_kernel(gy, x, kh, kw, sh, sw, ph, pw):
    return backend_for(gy.dtype, x.dtype).conv2d_backward_kernel(gy, x, kh, kw, sh, sw, ph, pw)


def upsample2x_forward(x):
    return backend_for(x.dtype).upsample2x_forward(x)


def upsample2x_backward(gy):
    return backend_for(gy.dtype).upsample2x_backward(gy)
