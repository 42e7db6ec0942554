"""Local intersection pairings on products of metrized graphs."""

__version__ = "0.1.0"
