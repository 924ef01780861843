"""Build script: compiles the optional Cython search kernel.

The package works without the extension (a pure-Python kernel is selected
at import time), so a failed Cython build degrades gracefully instead of
blocking installation.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("mbdgame._core", ["src/mbdgame/_core.pyx"])],
        language_level=3,
        compiler_directives={"boundscheck": False, "wraparound": False},
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"warning: Cython kernel not built ({exc}); pure-Python fallback will be used")

setup(ext_modules=ext_modules)
