import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python fallback is selected at import time
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("POLARITON_CLONE_NO_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "polariton_clone._kernels",
                ["src/polariton_clone/_kernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
