"""Certified fidelity lower bounds for symmetric many-body states from partial information."""

__version__ = "0.1.0"
