"""Symmetric Q-learning on top of from-scratch SAC and REDQ."""

__version__ = "0.1.0"
