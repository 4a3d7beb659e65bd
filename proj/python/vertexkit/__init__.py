"""Exact singular multilinear maps, vertex groups and vertex algebras."""

from ._core import (
    Error,
    Hopf,
    MultiMap,
    Series,
    VertexAlgebra,
    algebra_family_check,
    enumerate_trees,
    is_refinement,
    linear_extensions,
    localize,
)

__all__ = [
    "Error",
    "Hopf",
    "MultiMap",
    "Series",
    "VertexAlgebra",
    "algebra_family_check",
    "enumerate_trees",
    "is_refinement",
    "linear_extensions",
    "localize",
]
