"""Build hook for the optional compiled kernel extension.

The package is fully functional without the extension (a pure-numpy twin of
every kernel ships alongside it), so a missing Cython toolchain downgrades
the build instead of failing it.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "hamsterwheel._kernels",
                ["src/hamsterwheel/_kernels.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
else:
    extensions = []

setup(ext_modules=extensions)
