"""Coherence of operad presentations: exact linear algebra over free operads."""

__version__ = "0.1.0"
