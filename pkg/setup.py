"""Build the optional compiled simulation kernel.

The package works without it; ``quakectl._backend`` falls back to the
pure-Python implementation when the extension is missing.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("QUAKECTL_NO_EXT"):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext = Extension(
            "quakectl._kernel",
            ["src/quakectl/_kernel.pyx"],
            extra_compile_args=["-O3", "-ffp-contract=off"],
        )
        ext_modules = cythonize(
            [ext],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
