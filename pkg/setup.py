#!/usr/bin/env python
from setuptools import setup

description = "symivp - even and odd solutions of y'' = f(y) by successive approximations"

with open('requirements.txt') as f:
    requirements = f.read().splitlines()

with open('README.md') as f:
    long_description = f.read()

setup(name="symivp",
      description=description,
      long_description=long_description,
      long_description_content_type='text/markdown',
      version='0.1',
      install_requires=requirements,
      extras_require={'test': ['pytest', 'hypothesis']},
      packages=['symivp'],
      entry_points={'console_scripts': ['symivp = symivp.cli:main']},
)
