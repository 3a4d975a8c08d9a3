"""Build script: compiles the optional Cython kernel extension.

The package is fully functional without the extension (a numpy fallback is
selected at import time), so compilation failures only emit a warning.
"""

import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible; fall back to pure Python otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, headers, ...
            warnings.warn(f"skipping compiled kernels ({exc}); using numpy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"skipping {ext.name} ({exc}); using numpy fallback")


def _extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "v2xrl._kernels",
        ["src/v2xrl/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=_extensions(), cmdclass={"build_ext": OptionalBuildExt})
