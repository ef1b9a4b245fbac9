import os

import numpy as np
from setuptools import Extension, setup

# The tracker kernel is optional: the package falls back to the pure-Python
# backend when the extension is absent, so a missing Cython toolchain must
# not break the install.
try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    if not os.path.exists("src/fop/psolve/_kernel.pyx"):
        raise SystemExit("missing src/fop/psolve/_kernel.pyx")
    ext_modules = cythonize(
        [
            Extension(
                "fop.psolve._kernel",
                ["src/fop/psolve/_kernel.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # -ffp-contract=off keeps the compiled arithmetic on the same
                # IEEE operation sequence as the pure-Python backend.
                extra_compile_args=["-O2", "-ffp-contract=off"],
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
