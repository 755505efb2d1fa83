"""Build script for the compiled nearest-neighbor matching kernel.

The package works without the extension (a numpy fallback is selected at
import time); building it just makes large matching runs faster.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
    import numpy
except ImportError:  # pragma: no cover - build environments without Cython
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "confound_quant._match_ext",
                sources=["src/confound_quant/_match_ext.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level="3",
    )

setup(ext_modules=ext_modules)
