"""Controllable portrait renderer built on a conditioned coordinate MLP."""

from .kernels import BACKEND as KERNEL_BACKEND
from .kernels import HAS_ACCEL

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "HAS_ACCEL", "__version__"]
