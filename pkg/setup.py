"""Builds the optional compiled kernel extension.

If Cython is unavailable the build still succeeds; the package falls back
to the pure-numpy kernels at import time.
"""
from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/nlkaczmarz/_kernels.pyx"],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
