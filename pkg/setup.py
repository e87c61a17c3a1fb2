# Copyright (c) gapdyn developers. All rights reserved.
# Licensed under the MIT License.

from pathlib import Path
from setuptools import setup, find_packages
import time
from os import environ

here = Path(__file__).absolute().parent
version_data = {}
with open(here.joinpath("gapdyn", "__init__.py"), "r") as f:
    exec(f.read(), version_data)
version = version_data.get("__version__", "0.0")

# Get the long description from the README file
with open(here.joinpath("gapdyn", "README.md"), encoding="utf-8") as f:
    LONG_DESCRIPTION = f.read()

HASH = environ.get("HASH", None)
if HASH is not None:
    version += ".post" + str(int(time.time()))

name = environ.get("LIBRARY_NAME", "gapdyn")

install_requires = [
    "joblib>=0.14,<2",
    "numpy>=1.13.3",
    "pandas>1.0.3",
    "pyyaml>=5.4.1",
    "scipy>=1.6.0,<2",  # scipy.integrate.trapezoid
    "tqdm>=4.31.1,<5",
]

extras_require = {
    "dev": [
        "black>=18.6b4,<21",
        "pytest>=3.6.4",
    ],
    "docs": [
        "sphinx>=3,<5",
        "sphinx_rtd_theme>=0.5,<1",
    ],
}
extras_require["all"] = list(set(sum([*extras_require.values()], [])))


setup(
    name=name,
    version=version,
    description="Dissipative Hamiltonian simulation with gap-functional diagnostics",
    long_description=LONG_DESCRIPTION,
    long_description_content_type="text/markdown",
    author="gapdyn developers",
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Developers",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Physics",
        "Topic :: Scientific/Engineering :: Mathematics",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3.7",
    ],
    extras_require=extras_require,
    keywords="hamiltonian dissipation convex analysis plasticity damage contact integrator",
    install_requires=install_requires,
    package_dir={"gapdyn": "gapdyn"},
    packages=find_packages(where=".", exclude=["tests", "tests.*", "docs", "examples"]),
    package_data={"gapdyn.config": ["scenarios/*.yaml"]},
    entry_points={"console_scripts": ["gapdyn = gapdyn.cli:main"]},
    python_requires=">=3.7, <4",
)
