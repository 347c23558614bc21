"""Builds the optional compiled kernels; the package works without them."""

import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

ext = Extension(
    "nematic_or._ckernels",
    ["src/nematic_or/_ckernels.pyx"],
    include_dirs=[numpy.get_include()],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    extra_compile_args=["-O3"],
    optional=True,
)

setup(ext_modules=cythonize([ext], language_level=3, quiet=True))
