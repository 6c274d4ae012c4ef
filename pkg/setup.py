#!/usr/bin/env python3
"""Setup script for HiddenShift"""
from setuptools import setup, find_packages

setup(
    name="hiddenshift",
    version="0.1.0",
    description="Simulate and measure the quantum algorithm for the Boolean hidden shift problem",
    author="HiddenShift Team",
    python_requires=">=3.10",
    packages=find_packages(exclude=["tests"]),
    py_modules=['main', 'boolfn', 'gf2', 'qsim', 'solver', 'harness', 'verifier', 'errors'],
    install_requires=[
        "numpy>=1.24",
        "click>=8.1.0",
        "packaging>=23.0",
    ],
    extras_require={
        "dev": ["pytest>=7.0"],
    },
    entry_points={
        "console_scripts": [
            "hiddenshift=main:main",
        ],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Physics",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
    ],
)
