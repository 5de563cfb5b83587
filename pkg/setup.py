import numpy as np
from setuptools import Extension, setup
from Cython.Build import cythonize

# Compiled sparse-matrix kernels for the density-matrix right-hand side.
# The package falls back to a scipy implementation if the extension is
# missing, so a failed build only costs speed.
extensions = [
    Extension(
        "eprcascade._speedups",
        ["src/eprcascade/_speedups.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}))
