"""Builds the compiled Reed-Solomon kernel.

The extension is optional: if it fails to compile, the package installs
anyway and the pure-Python codec takes over at import time.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("lifeserver.callosum._rs_kernel",
                   ["src/lifeserver/callosum/_rs_kernel.pyx"],
                   optional=True)],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
