"""Build script: compiles the optional Cython kernel extension.

The extension is best-effort; if Cython or a C compiler is unavailable the
package installs anyway and falls back to the pure-NumPy kernels.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "fbmcsim._kernels._core",
                ["src/fbmcsim/_kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
