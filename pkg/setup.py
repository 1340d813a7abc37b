from setuptools import setup, find_packages

setup(
    name="subdiff-lab",
    version="0.1.0",
    packages=find_packages(exclude=["tests"]),
    install_requires=[
        "numpy>=1.26",
    ],
    extras_require={
        "test": ["pytest>=8.2.0", "pytest-asyncio>=0.24.0", "pytest-cov>=4.1.0"],
    },
    entry_points={
        "console_scripts": ["subdiff-lab=subdiff_lab.cli:main"],
    },
    author="Dev Bot",
    description="Reproducible experiments on uniform laws of large numbers for subdifferentials",
    python_requires=">=3.10",
)
