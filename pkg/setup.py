# @see https://setuptools.pypa.io/en/latest/userguide/quickstart.html
import os

from setuptools import find_packages, setup


def read(fname):
    return open(os.path.join(os.path.dirname(__file__), fname)).read()


setup(
    name="jumpsets",
    version="0.0.1",
    description="Estimate the jump set of a noisy gridded signal, with its geometry and topology",
    license="MIT",
    packages=find_packages(exclude=["tests", "examples", "examples.*"]),
    long_description=read("README.md"),
    long_description_content_type="text/markdown",
    install_requires=[
        "agate",
        "invoke>=2.0",
        "joblib",
        "numpy>=1.20",
        "scipy>=1.6",
    ],
    entry_points={
        "console_scripts": [
            "jumpsets = jumpsets.tasks:program.run",
        ],
    },
)
