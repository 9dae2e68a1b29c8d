"""Build the optional compiled kernels.

The package works without them: ``polylab.kernels`` falls back to the
numpy implementations in ``polylab._fallback`` when ``_accel`` is missing.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("POLYLAB_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "polylab._accel",
                    ["src/polylab/_accel.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
