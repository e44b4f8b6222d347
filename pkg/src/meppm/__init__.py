"""Coded- and divided-MEPPM multiple access for LED visible light links."""

__version__ = "0.1.0"
