import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

ext = Extension(
    "subscan._kernels._core",
    ["src/subscan/_kernels/_core.pyx"],
    include_dirs=[numpy.get_include()],
    # -ffp-contract=off: fused multiply-adds would change results relative to
    # the pure backend; elementwise vectorization is still allowed and exact.
    extra_compile_args=["-O3", "-march=native", "-ffp-contract=off"],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
)

setup(
    ext_modules=cythonize(
        [ext],
        language_level=3,
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
)
