"""Build script for the optional compiled scan kernel.

The matcher works without the extension (a pure-Python scanner is selected at
import time), so the build is marked optional: a missing compiler or Cython
degrades to the fallback instead of failing the install.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext = Extension(
        "trdsent._scan",
        ["src/trdsent/_scan.pyx"],
        extra_compile_args=["-O3"],
        optional=True,
    )
    ext_modules = cythonize(
        [ext],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "initializedcheck": False,
        },
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
