"""Build script for the optional compiled kernels.

The package works without them; ``matchgap._backend`` falls back to the
numpy implementation when the extension is missing.
"""
import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("MATCHGAP_NO_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "matchgap._kernels",
                ["src/matchgap/_kernels.pyx"],
                include_dirs=[np.get_include()],
                language="c++",
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": 3},
    )

setup(ext_modules=ext_modules)
