import io

from setuptools import find_packages, setup

# Read the README.md file
with io.open("README.md", "r", encoding="utf-8") as f:
    long_description = f.read()

install_requires = [
    "numpy==1.26.4",
    "scipy==1.13.1",
    "pandas==2.2.2",
    "h5py==3.11.0",
    "rapidfuzz==3.9.3",
    "psutil==7.0.0",
]

extras_require = {
    "dev": ["ruff", "mypy", "pytest", "types-setuptools", "types-psutil", "pandas-stubs"],
}

setup(
    name="OpenBiphoton",
    version="0.1",
    packages=find_packages(exclude=["tests"]),
    package_data={"openbiphoton": ["data/*.json"]},
    install_requires=install_requires,
    long_description=long_description,
    long_description_content_type="text/markdown",
    extras_require=extras_require,
    entry_points={"console_scripts": ["openbiphoton=openbiphoton.app:main"]},
)
