from setuptools import Extension, setup

# The Chu-Liu-Edmonds kernel is compiled when Cython and a C toolchain are
# available; otherwise the package installs with the pure-Python decoder only.
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "pparse._cle",
                ["src/pparse/_cle.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
