# coding: UTF-8
"""Black-box replacement testing of reactive systems."""

__version__ = '0.1'
