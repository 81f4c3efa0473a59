"""Presence-condition driven configuration generation."""

__version__ = "0.1.0"
