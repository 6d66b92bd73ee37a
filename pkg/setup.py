"""Build script: compiles the optional mixture-posterior kernel.

The package is fully functional without the extension; kernels.py falls
back to the numpy implementation when the import fails, so any build
error here is downgraded to a warning.
"""

import warnings

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, broken toolchain
            warnings.warn(f"skipping compiled kernel: {exc}")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"skipping compiled kernel {ext.name}: {exc}")


ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/noisebeam/_kernels.pyx"],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except ImportError:
    warnings.warn("Cython not available; installing with the pure numpy kernel")

setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
