"""Build the optional compiled SAT core.

    pip install -e . --no-build-isolation
    python setup.py build_ext --inplace

If Cython or a C++ compiler is missing the package still installs and runs
on the pure-Python core.
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
                "varconf._core",
                sources=["src/varconf/_core.pyx"],
                language="c++",
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
