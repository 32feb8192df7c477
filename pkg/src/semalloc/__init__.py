"""Semantic-aware device and triplet selection under bandwidth, power and deadline limits."""

__version__ = "0.1.0"
