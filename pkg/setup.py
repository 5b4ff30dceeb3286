import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("REACTMIX_NO_EXT", "") in ("", "0"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext = Extension(
            "reactmix._kernels",
            ["src/reactmix/_kernels.pyx"],
            include_dirs=[np.get_include()],
            # no fast-math: the kernels must round like the numpy twins
            extra_compile_args=["-O3", "-ffp-contract=off"],
        )
        ext_modules = cythonize([ext], language_level=3)

setup(ext_modules=ext_modules)
