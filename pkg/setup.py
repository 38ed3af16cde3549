#!/usr/bin/env python
#  -*- encoding: utf-8 -*-
"""
keywords: property graph, schema discovery, LSH, PG-Schema
"""

import io
import os
import re

import setuptools


__title__ = "graphtypes"

HERE = os.path.dirname(os.path.abspath(__file__))
RE_VERSION = re.compile(r'^__version__\s*=\s*"([^"]+)"', re.MULTILINE)

ENTRY_POINTS = """
[console_scripts]
{t} = {t}.commands:main
""".format(
    t=__title__
)


def contents(*relative_path):
    with io.open(os.path.join(HERE, *relative_path), "rt", encoding="utf-8") as fh:
        return fh.read()


def listed(*relative_path):
    """Non-empty, non-comment lines of file at 'relative_path'"""
    result = []
    for line in contents(*relative_path).splitlines():
        line = line.partition("#")[0].strip()
        if line:
            result.append(line)
    return result


if __name__ == "__main__":
    os.chdir(HERE)
    setuptools.setup(
        name=__title__,
        version=RE_VERSION.search(contents(__title__, "__init__.py")).group(1),
        description="Discover node and edge types in property graph dumps",
        long_description=contents("README.rst"),
        long_description_content_type="text/x-rst",
        author="graphtypes developers",
        license="MIT",
        classifiers=listed("classifiers.txt"),
        keywords="property graph, schema discovery, LSH, PG-Schema",
        packages=[__title__],
        python_requires=">=3.7",
        install_requires=listed("requirements.txt"),
        tests_require=listed("tests", "requirements.txt"),
        entry_points=ENTRY_POINTS,
        zip_safe=True,
    )
