"""Build script for the optional compiled kernel.

The package is pure Python except for one Cython extension holding the
forward-evaluation inner loop. If Cython or a C compiler is unavailable the
extension is skipped and the numpy reference kernel is used at runtime.
"""

from setuptools import Extension, setup


def _extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "spiderdtn._kernels._compiled",
        ["src/spiderdtn/_kernels/_compiled.pyx"],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=_extensions())
