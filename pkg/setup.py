"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension: labelshift.kernels
falls back to the numpy implementation when labelshift.kernels._fast is
not importable. Building therefore degrades gracefully when Cython or a
C++ compiler is missing.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible; warn and continue otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            f"WARNING: compiled kernels not built ({exc}); "
            "falling back to the pure numpy implementation",
            file=sys.stderr,
        )


ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "labelshift.kernels._fast",
                ["src/labelshift/kernels/_fast.pyx"],
                language="c++",
                extra_compile_args=["-O3", "-std=c++11"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    print(
        "WARNING: Cython not available; installing without compiled kernels",
        file=sys.stderr,
    )

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
