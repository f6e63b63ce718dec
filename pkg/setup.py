"""Build script: compiles the optional fast-kernel extension when Cython and a
C compiler are available.  The package is fully functional without it (the
numpy fallback kernels are selected at import time), so the extension is
marked optional and build failures are non-fatal."""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize
    import numpy as np

    ext = Extension(
        "hodgebench.kernels._ckern",
        ["src/hodgebench/kernels/_ckern.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    ext.optional = True
    ext_modules = cythonize([ext], compiler_directives={"language_level": "3"})
except ImportError:
    pass

setup(ext_modules=ext_modules)
