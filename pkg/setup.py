#!/usr/bin/env python3
"""
Setup script for the CATS bandit tool.
"""

from setuptools import setup, find_packages

setup(
    name="cats_bandit",
    version="0.1.0",
    description="Contextual bandits with continuous actions: tree policies, smoothing and off-policy selection",
    author="Your Name",
    packages=find_packages(exclude=["tests", "tests.*"]),
    install_requires=[
        "numpy>=1.22",
        "scipy>=1.8",
        "scikit-learn>=1.1",  # check_scalar, train_test_split
        "pandas>=1.4",
        "joblib>=1.1",
    ],
    extras_require={
        "test": [
            "pytest>=7.0",
            "pytest-benchmark>=4.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "cats_bandit=cats_bandit.main:main",
        ],
    },
    python_requires=">=3.8",
)
