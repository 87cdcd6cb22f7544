"""
Setup script for jugglespec package.
"""

from setuptools import setup, find_packages

setup(
    name="jugglespec",
    version="0.1.0",
    description="Siteswap juggling planner with hand trajectory optimization and contact-physics verification",
    author="",
    packages=find_packages(include=["jugglespec", "jugglespec.*"]),
    py_modules=["main"],
    include_package_data=True,
    install_requires=[
        "typer>=0.9.0",
        "rich>=13.6.0",
        "python-dotenv>=1.0.0",
        "pydantic>=2.5.0",
        "pyyaml>=6.0.0",
        "numpy>=1.26.0",
        "scipy>=1.11.0",
    ],
    extras_require={
        "dev": [
            "pytest>=8.0.0",
            "pytest-cov>=4.1.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "jugglespec=main:app",
        ],
    },
    python_requires=">=3.12",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.12",
    ],
)
