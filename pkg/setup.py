"""Build script for the optional compiled curvature kernel.

The package is fully functional without the extension (a pure-numpy
fallback is selected at import time); the extension exists because the
flow stepper evaluates the star-Ricci tensor over every grid point four
times per RK4 step, which dominates runtime.
"""
import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext = Extension(
        "starlab._curvature_cy",
        ["src/starlab/_curvature_cy.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3", "-fopenmp"],
        extra_link_args=["-fopenmp"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    ext.optional = True  # build failure degrades to the numpy fallback
    ext_modules = cythonize([ext], language_level=3)

setup(ext_modules=ext_modules)
