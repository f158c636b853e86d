"""Build script for the compiled sampling kernel.

The extension is optional: if Cython or a C compiler is unavailable the
package installs without it and the NumPy fallback kernel is used at
import time.
"""

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

DIRECTIVES = {
    "language_level": "3",
    "boundscheck": False,
    "wraparound": False,
    "cdivision": True,
}

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "walkgossip._kernels._mc",
                ["src/walkgossip/_kernels/_mc.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives=DIRECTIVES,
    )

setup(ext_modules=ext_modules)
