import os

import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

np_random_lib = os.path.join(os.path.dirname(numpy.__file__), "random", "lib")

setup(
    ext_modules=cythonize(
        [
            Extension(
                "hitlab._bridge_kernels",
                ["src/hitlab/_bridge_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                library_dirs=[np_random_lib],
                libraries=["npyrandom"],
                # FP contraction off: the kernels promise bit-identical
                # results against the pure-numpy backend, so no FMA fusing
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
)
