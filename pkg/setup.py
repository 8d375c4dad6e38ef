"""Build script for the optional compiled guidance kernel.

The package works without the extension (a numpy fallback is selected at
import time); building it just makes single-trajectory integration much
faster.  `pip install -e . --no-build-isolation` compiles it when Cython
and a C compiler are present.
"""
from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "qworlds.bohm._kernels_cy",
                ["src/qworlds/bohm/_kernels_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
