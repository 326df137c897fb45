#!/usr/bin/env python

from setuptools import setup

setup(name='replacement-tester',
    version='0.1',
    description='Black-box replacement testing of reactive systems.',
    packages=['replacement_tester'],
    package_data={'replacement_tester': ['data/*']},
    python_requires='>=3.8',
    install_requires=['numpy', 'scipy', 'PyYAML', 'networkx'],
    tests_require=['hypothesis'],
    entry_points={'console_scripts': ['replacement-tester=replacement_tester.main:main']}
)
