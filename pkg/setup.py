"""Build hook for the optional compiled solver kernel.

The package is pure Python plus one optional Cython extension holding the
ADMM inner loop. If Cython or a C compiler is unavailable the extension is
skipped and the numpy fallback kernel is used at runtime.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "ipursuit._solver_cy",
                ["src/ipursuit/_solver_cy.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
