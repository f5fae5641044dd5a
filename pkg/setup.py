"""Build script: compiles the closed-loop integration kernel.

The package works without the compiled extension (a pure-numpy fallback is
selected at import time), so compilation failures are downgraded to a
warning rather than aborting the install.
"""

import warnings

from setuptools import setup

try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [
            Extension(
                "elevform._speedups",
                ["src/elevform/_speedups.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": 3},
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    warnings.warn(f"building without the compiled kernel: {exc}")
    ext_modules = []

setup(ext_modules=ext_modules)
