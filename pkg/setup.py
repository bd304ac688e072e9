import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

ext = Extension(
    "packrig.kernels._ckernels",
    ["src/packrig/kernels/_ckernels.pyx"],
    include_dirs=[np.get_include()],
)

setup(ext_modules=cythonize([ext], compiler_directives={"language_level": 3}))
