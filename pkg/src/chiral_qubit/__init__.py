"""Chiral fermions on a flux-threaded ring and the two-level chiral qubit."""

from chiral_qubit.errors import (
    AccuracyError,
    ConfigError,
    DomainError,
    WindowOverflowError,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "ConfigError",
    "DomainError",
    "WindowOverflowError",
    "__version__",
]
