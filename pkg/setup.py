import sys

from setuptools import Extension, setup

# The compiled Smith-normal-form kernel is optional: the package falls back to
# the pure-Python elimination at import time if the extension is missing.
ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("gkac._snfcore", ["src/gkac/_snfcore.pyx"])],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    sys.stderr.write(f"warning: building without compiled SNF kernel ({exc})\n")

setup(ext_modules=ext_modules)
