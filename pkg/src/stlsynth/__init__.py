"""Zonotope-based workspace decomposition and controller synthesis for STL reach-avoid tasks."""

from .geometry import (
    Box,
    ConstrainedZonotope,
    Zonotope,
    contains_point,
    contains_set,
    expand,
    intersect,
    interval_hull,
    is_empty,
    linear_map,
    minkowski_sum,
    vertices_2d,
    volume,
)

__version__ = "0.1.0"

__all__ = [
    "Box",
    "ConstrainedZonotope",
    "Zonotope",
    "contains_point",
    "contains_set",
    "expand",
    "intersect",
    "interval_hull",
    "is_empty",
    "linear_map",
    "minkowski_sum",
    "vertices_2d",
    "volume",
    "__version__",
]
