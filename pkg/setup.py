import os
import sys

from setuptools import setup, find_packages

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

with open("requirements.txt") as f:
    install_requires = [line for line in f.read().strip().split("\n") if not line.startswith("#")]

# get version from __version__ variable in ribbon_screen/__init__.py
from ribbon_screen import __version__ as version

setup(
    name="ribbon_screen",
    version=version,
    description="Ribbon concordance screening from grid diagrams",
    author="Ribbon Screen contributors",
    author_email="maintainers@ribbon-screen.invalid",
    packages=find_packages(),
    zip_safe=False,
    include_package_data=True,
    install_requires=install_requires,
    entry_points={"console_scripts": ["ribbon-screen = ribbon_screen.utils.cli:main"]},
)
