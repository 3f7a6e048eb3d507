"""Build script for the compiled max-flow core.

The extension is optional: if it fails to build or import, the package
falls back to the pure-Python implementation in
``aperture_forge.maxflow._bk_py``.

For an in-place development build:

    python setup.py build_ext --inplace
"""

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "aperture_forge.maxflow._bk_cy",
        ["src/aperture_forge/maxflow/_bk_cy.pyx"],
        include_dirs=[np.get_include()],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
)
