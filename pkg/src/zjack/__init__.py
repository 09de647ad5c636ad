"""Pfaffian point processes for z-measures on partitions at Jack parameter 2."""

from .partitions import HalfInt, YoungDiagram, ZParams

__all__ = ["HalfInt", "YoungDiagram", "ZParams"]

__version__ = "0.1.0"
