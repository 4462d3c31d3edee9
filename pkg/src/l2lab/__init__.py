"""Exact computation of kernel dimensions for hook operators over lamplighter-type groups."""

__version__ = "0.1.0"
