import glob
import os

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

eigen_candidates = ["/usr/include/eigen3", "/usr/local/include/eigen3"]
eigen_include = next(p for p in eigen_candidates if os.path.isdir(p))

ext = Pybind11Extension(
    "metaws._core",
    sorted(glob.glob(os.path.join("src", "*.cpp")))
    + [os.path.join("python", "bindings.cpp")],
    include_dirs=["include", "vendor", eigen_include],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
