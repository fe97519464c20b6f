"""
Grid Module - Titik grid pada unit sphere
"""

from app.grid.sphere_grid import (
    SphereGrid,
    latlon_to_xyz,
    xyz_to_latlon,
    great_circle_angle,
    distance_matrix,
    epsilon_ball,
    ball_membership,
    nearest_neighbor_angles,
    isotropy_summary,
    gaussian_grid,
    subset_grid,
    hemisphere_mask,
)
from app.grid.fekete import fekete_grid, fibonacci_points

__all__ = [
    "SphereGrid",
    "latlon_to_xyz",
    "xyz_to_latlon",
    "great_circle_angle",
    "distance_matrix",
    "epsilon_ball",
    "ball_membership",
    "nearest_neighbor_angles",
    "isotropy_summary",
    "gaussian_grid",
    "subset_grid",
    "hemisphere_mask",
    "fekete_grid",
    "fibonacci_points",
]
