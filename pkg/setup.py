"""
Setup configuration for curvedbody.
"""

from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="curvedbody",
    version="0.1.0",
    author="curvedbody developers",
    description="Gyroscopic and affine bodies in curved manifolds: dynamics, spectra and bracket verification",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests"]),
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Physics",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.8",
    install_requires=[
        "numpy>=1.21.0",
        "scipy>=1.7.0",
        "pytest>=7.0.0",
        "pyyaml>=6.0.0",
        "pandas>=1.5.0",
        "rich>=10.0.0",
    ],
    entry_points={
        "console_scripts": [
            "curvedbody=curvedbody.__main__:main",
        ],
    },
    include_package_data=True,
    package_data={
        "curvedbody": ["config/*.yaml"],
    },
)
