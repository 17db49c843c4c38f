"""MiniMaple: a type checker and reference interpreter for a statically checkable Maple subset."""

__version__ = '0.1.0'
