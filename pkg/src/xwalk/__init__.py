"""Street-level crosswalk imagery harvesting, weak labeling, and evaluation."""

__version__ = "0.1.0"
