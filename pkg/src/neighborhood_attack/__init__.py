"""Neighborhood Attack voter-type model: simulation, exact oracle and Stein bounds."""

__version__ = "0.1.0"

from .graph import Graph, NeighborhoodIndex, build_family, build_neighborhood_index, family_dims
from .chain import ChainConfig, run, sample_observables, step

__all__ = [
    "ChainConfig",
    "Graph",
    "NeighborhoodIndex",
    "build_family",
    "build_neighborhood_index",
    "family_dims",
    "run",
    "sample_observables",
    "step",
]
