"""
Setup script for the brwsearch toolkit.
"""
from setuptools import find_packages, setup

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

with open("brwsearch/requirements.txt", "r", encoding="utf-8") as fh:
    requirements = [
        line
        for line in fh.read().splitlines()
        if line and not line.startswith("#")
    ]

setup(
    name="brwsearch",
    version="0.1.0",
    author="brwsearch Team",
    author_email="info@example.com",
    description="Degree-biased random walk search for maximum-degree nodes",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*"]),
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.10",
    ],
    python_requires=">=3.10",
    install_requires=requirements,
    entry_points={
        "console_scripts": [
            "brwsearch=brwsearch.__main__:main",
        ],
    },
    include_package_data=True,
)
