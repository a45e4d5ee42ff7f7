"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension; ``hardylab._backend``
falls back to the pure-Python kernels when the compiled module is absent.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "hardylab._kernels",
                ["src/hardylab/_kernels.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": 3},
    )

setup(ext_modules=ext_modules)
