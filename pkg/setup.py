"""Setup for gqla."""
# pyright: basic

from setuptools import setup

setup()
