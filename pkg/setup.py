import sys

from setuptools import Extension, setup

# The Cython reachability kernel is an optional accelerator.  If Cython or a
# C compiler is missing the package still works on the pure-Python twin
# (hashnets.petri._kernel_py), selected at import time.
ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "hashnets.petri._kernel",
                ["src/hashnets/petri/_kernel.pyx"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build environment dependent
    sys.stderr.write("hashnets: skipping Cython kernel build (%s)\n" % exc)

setup(ext_modules=ext_modules)
