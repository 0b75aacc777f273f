"""Build script.

The Cython kernel is optional: if Cython or a C compiler is missing the
package installs with the pure-Python fallback and everything still works
(the kernel only accelerates the sparse Cauchy product).
"""
from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/bigphase/_series_kernel.pyx"],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build environment dependent
    print(f"bigphase: building without the compiled kernel ({exc})")

setup(ext_modules=ext_modules)
