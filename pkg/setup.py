"""Builds the optional Cython kernel extension.

The package is fully functional without it (the numpy fallback is selected
at import time); set PORTRAITFIELD_NO_ACCEL=1 to skip the compile step.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("PORTRAITFIELD_NO_ACCEL") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize

        ext = Extension(
            "portraitfield.kernels._accel",
            sources=["src/portraitfield/kernels/_accel.pyx"],
            include_dirs=[np.get_include()],
            extra_compile_args=["-O3", "-fopenmp"],
            extra_link_args=["-fopenmp"],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )
        ext_modules = cythonize(
            [ext],
            compiler_directives={
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "language_level": "3",
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
