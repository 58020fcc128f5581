from setuptools import setup, find_packages

from constants.information import (
    QDECIDE_NAME,
    QDECIDE_VERSION,
    QDECIDE_DESCRIPTION,
    QDECIDE_AUTHOR,
    QDECIDE_AUTHOR_EMAIL,
    QDECIDE_MAINTAINER,
    QDECIDE_MAINTAINER_EMAIL,
)

setup(
    name=QDECIDE_NAME,
    version=QDECIDE_VERSION,
    description=QDECIDE_DESCRIPTION,
    author=QDECIDE_AUTHOR,
    author_email=QDECIDE_AUTHOR_EMAIL,
    maintainer=QDECIDE_MAINTAINER,
    maintainer_email=QDECIDE_MAINTAINER_EMAIL,
    packages=find_packages(exclude=["tests", "examples", "examples.*"]),
    py_modules=["app"],
    install_requires=[
        "numpy>=1.22",
        "scipy>=1.8",
    ],
    extras_require={
        "test": ["pytest>=7.0"],
    },
    entry_points={
        "console_scripts": [
            "qdecide=app:main",
        ],
    },
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Physics",
    ],
    python_requires=">=3.9",
)
