"""Build script for the optional compiled scoring kernel.

The package works without the extension: kgqa.scoring falls back to the
pure-Python kernel when the compiled module is missing.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "kgqa._scoring_c",
                ["src/kgqa/_scoring_c.pyx"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
