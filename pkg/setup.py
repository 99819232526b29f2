"""Builds the compiled kernel extension.

The package works without the extension (a pure-Python fallback is selected
at import time), so the build degrades gracefully when Cython or a C
compiler is unavailable.
"""
from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "sightline._kernels._core",
                ["src/sightline/_kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
