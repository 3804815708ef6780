"""Simulation and bound evaluation for f-random access codes."""

__version__ = "0.1.0"
