"""Pseudo-spectral laboratory for the generalized SQG family on the periodic square."""
from .spectral import Grid2D, random_field

__all__ = ["Grid2D", "random_field"]
__version__ = "0.1.0"
