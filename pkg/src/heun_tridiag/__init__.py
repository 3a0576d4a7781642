"""Heun operators from tridiagonalization of classical hypergeometric-type operators."""

__version__ = "0.1.0"
SCHEMA = "heun-tridiag/1"
