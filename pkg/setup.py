import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "cavmol._qcme_cy",
                ["src/cavmol/_qcme_cy.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level="3",
    )
else:
    # pure-Python install still works; the propagator falls back to numpy
    ext_modules = []

setup(ext_modules=ext_modules)
