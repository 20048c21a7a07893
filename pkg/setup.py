from setuptools import Extension, setup
from Cython.Build import cythonize

extensions = [
    Extension(
        "eonplan.kernels._fast",
        ["src/eonplan/kernels/_fast.pyx"],
        extra_compile_args=["-O3"],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
