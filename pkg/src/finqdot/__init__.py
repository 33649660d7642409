"""Hole spin qubit simulator for fin-shaped silicon quantum devices."""

__version__ = "0.1.0"
