"""Threshold-logic synthesis and spin-memristor hardware mapping toolchain."""

__version__ = "0.1.0"
