"""Bubblelab - numerical lab for two-bubble k-equivariant wave maps."""

__version__ = "0.1.0"
