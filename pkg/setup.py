"""
Setup file. Metadata lives in pyproject.toml.
"""

import os

import setuptools

HERE = os.path.dirname(os.path.abspath(__file__))


def get_readme() -> str:
    with open(os.path.join(HERE, "README.md"), encoding="utf-8", mode="r") as readme_file:
        return readme_file.read()


if __name__ == "__main__":
    setuptools.setup(
        long_description=get_readme(),
        long_description_content_type="text/markdown",
    )
