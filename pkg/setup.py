from setuptools import find_packages, setup

setup(
    name="algdep",
    version="0.3.0",
    author="algdep developers",
    description=(
        "Exact algebraic-dependence, approximate-satisfiability and "
        "hitting-set checks over finite fields."
    ),
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*"]),
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.9",
    install_requires=[
        "pydantic>=2.9",
        "numpy>=1.24",
    ],
    entry_points={"console_scripts": ["algdep=algdep.cli:main"]},
)
