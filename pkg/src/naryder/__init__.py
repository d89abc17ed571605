"""Derivations, local and 2-local derivations of simple n-ary algebras, exactly."""

__version__ = "0.1.0"
