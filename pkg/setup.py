import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("STEMNOISE_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "stemnoise._kernels",
                    ["src/stemnoise/_kernels.pyx"],
                    # No FMA contraction: the compiled and numpy kernels must
                    # round identically.
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )

setup(ext_modules=ext_modules)
