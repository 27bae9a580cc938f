"""Builds the optional compiled convolution kernels.

The package is fully functional without the extension: losscape.kernels
falls back to the numpy implementations when the import fails.
"""

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# -ffp-contract=off keeps the compiler from fusing multiply-adds so the
# compiled kernels accumulate in exactly the same rounding sequence as the
# numpy reference (forward results are bit-identical across backends).
extensions = [
    Extension(
        "losscape.kernels._convkern",
        ["src/losscape/kernels/_convkern.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3", "-ffp-contract=off"],
        optional=True,
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
