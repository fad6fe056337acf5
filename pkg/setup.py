"""Build the optional Cython Gram kernels.

The extension is marked optional: if it fails to compile, the package
installs anyway and runs on the numpy fallback.
"""

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover
    cythonize = None

if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "kivband._core",
                ["src/kivband/_core.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level=3,
    )
else:
    ext_modules = []

setup(ext_modules=ext_modules)
