"""Build hook for the optional scatterer-scatterer Monte Carlo extension.

The package works without the compiled module (a pure-Python fallback with
the identical RNG draw order is selected at import time), so the extension
is marked optional: a missing C toolchain degrades performance, not
functionality.
"""

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "qdcsim._sskernel",
        ["src/qdcsim/_sskernel.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
