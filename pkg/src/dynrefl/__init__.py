"""Construction and exact verification of dynamical reflection algebras."""

__version__ = "0.1.0"
