import os
import sys

from setuptools import setup

ext_modules = []
if os.environ.get("BLOCKMIT_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        # plain complex products; skips the C99 inf/nan recovery path
        flags = ["/O2"] if sys.platform == "win32" else ["-O3", "-fcx-limited-range"]
        ext_modules = cythonize(
            [
                Extension(
                    "blockmit._ckernels",
                    ["src/blockmit/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=flags,
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
