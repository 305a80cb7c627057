"""Simulation, optimization and certification tools for SWAP-test position verification."""

__version__ = "0.1.0"

from .errors import DomainError, QpvError, StructuralError  # noqa: E402

__all__ = ["DomainError", "QpvError", "StructuralError", "__version__"]
