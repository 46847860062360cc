"""Local limit theorems for lattice walks attracted to stable laws."""

__version__ = "0.1.0"
