"""
Dendroflow - Setup Configuration
"""

from setuptools import setup, find_packages

# Read README file
with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

# Read requirements
with open("requirements.txt", "r", encoding="utf-8") as fh:
    requirements = [line.strip() for line in fh if line.strip() and not line.startswith("#")]

setup(
    name="dendroflow",
    version="0.2.0",
    author="Sharfuddin Shawon",
    author_email="sharf@shawon.me",
    description="Level-set trees, Horton-Strahler and Tokunaga statistics for time series",
    long_description=long_description,
    long_description_content_type="text/markdown",
    url="https://github.com/sharf-shawon/dendroflow",
    project_urls={
        "Bug Tracker": "https://github.com/sharf-shawon/dendroflow/issues",
    },
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Framework :: Django",
        "Framework :: Django :: 3.2",
        "Framework :: Django :: 4.2",
        "Framework :: Django :: 5.0",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    packages=find_packages(include=["dendroflow", "dendroflow.*"]),
    python_requires=">=3.9",
    install_requires=requirements,
    include_package_data=True,
    zip_safe=False,
    keywords="django time-series level-set-tree horton-strahler tokunaga galton-watson",
    entry_points={"console_scripts": ["dendroflow = dendroflow.cli:main"]},
    test_suite="tests",
)
