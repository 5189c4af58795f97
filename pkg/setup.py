"""Build script for the optional compiled kernels.

The Cython extension ``rmt_lab._kernels`` is built when Cython and a C
compiler are available. A failed build is not fatal: the package falls back
to ``rmt_lab._kernels_py`` at import time.
"""
import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # pragma: no cover - toolchain dependent
            warnings.warn(f"compiled kernels not built, using pure-Python fallback: {exc}")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # pragma: no cover - toolchain dependent
            warnings.warn(f"failed to build {ext.name}: {exc}")


def get_extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    extensions = [
        Extension(
            "rmt_lab._kernels",
            ["src/rmt_lab/_kernels.pyx"],
            extra_compile_args=["-O3"],
        )
    ]
    return cythonize(
        extensions,
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )


setup(ext_modules=get_extensions(), cmdclass={"build_ext": OptionalBuildExt})
