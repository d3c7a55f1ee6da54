"""Faulty Trotterization channels, channel distances, and step-number tradeoffs."""

__version__ = "0.1.0"
