import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

# No -ffast-math: the kernel must stay bit-identical to the scalar reference,
# so the compiler may not reassociate the accumulation.
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "dirad._kernels",
                ["src/dirad/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
else:
    ext_modules = []

setup(ext_modules=ext_modules)
