"""Four-body elliptic relative equilibria: reduction and linear stability."""

__version__ = "0.1.0"
