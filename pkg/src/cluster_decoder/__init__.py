"""Erasure decoding of CSS quantum LDPC codes by peeling plus cluster decomposition."""

__version__ = "0.1.0"
