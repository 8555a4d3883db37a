"""Geodesics on surfaces of revolution and graph surfaces."""

from .experiments import gauss_bonnet_triangle, invisibility_witness, visibility_experiment
from .flow import Trajectory, connect_geodesic, integrate_geodesic, trapped_ray_check
from .surfaces import GeodesicState, GraphSurface, RevolutionSurface

__all__ = [
    "GeodesicState",
    "GraphSurface",
    "RevolutionSurface",
    "Trajectory",
    "connect_geodesic",
    "gauss_bonnet_triangle",
    "integrate_geodesic",
    "invisibility_witness",
    "trapped_ray_check",
    "visibility_experiment",
]
