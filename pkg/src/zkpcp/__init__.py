"""Robust and zero-knowledge sumcheck PCPs, Oracle-3SAT and proof composition at desk scale."""

__version__ = "0.1.0"
