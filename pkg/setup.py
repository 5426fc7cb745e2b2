"""Build hook for the optional compiled kernel core.

The package works without the extension (a numpy fallback is selected at
import time); building it just makes the stencil/transport kernels faster:

    python setup.py build_ext --inplace
"""

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "zkdamper.kernels._core",
                ["src/zkdamper/kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level="3",
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
