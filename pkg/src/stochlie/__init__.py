"""Toolkit for recognising and analysing stochastic Lie systems."""

__version__ = "0.1.0"
