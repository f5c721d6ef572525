"""Numerical checks that unknown pure states cannot be coherently superposed."""

__version__ = "0.1.0"
