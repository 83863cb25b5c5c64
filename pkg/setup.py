#!/usr/bin/env python
from setuptools import find_packages, setup


def get_version():
    with open("uidiff/__init__.py") as f:
        for line in f:
            if line.startswith("__version__"):
                return line.split("=")[1].strip().strip('"')
    raise RuntimeError("version not found")


with open("requirements.txt") as f:
    install_requires = [line.strip() for line in f if line.strip() and not line.startswith("#")]

setup(
    name="uidiff",
    version=get_version(),
    description="Graph-based change detection between UI screenshots",
    packages=find_packages(exclude=("tests", "configs")),
    python_requires=">=3.8",
    install_requires=install_requires,
    extras_require={"dev": ["pytest>=7"]},
    entry_points={"console_scripts": ["uidiff=uidiff.cli:main"]},
)
