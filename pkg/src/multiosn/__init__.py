"""Friendship maintenance measures and link prediction across social networks."""

__version__ = "0.1.0"
