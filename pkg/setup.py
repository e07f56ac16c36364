import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = [
    Extension(
        "wiltonlab._ckern",
        ["src/wiltonlab/_ckern.pyx"],
        libraries=["gmp"],
        extra_compile_args=["-O3", "-funroll-loops"],
    )
]

if cythonize is not None and os.path.exists("src/wiltonlab/_ckern.pyx"):
    ext_modules = cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
else:
    # no Cython: install pure-Python only, the package falls back at import
    ext_modules = []

setup(ext_modules=ext_modules)
