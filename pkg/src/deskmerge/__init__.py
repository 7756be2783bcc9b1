"""Merge two desk workspaces into consistent shared layouts and retarget avatar pointing."""

from .geometry import Aabb, Ray, Rect3, Vec3, angular_distance, hausdorff, ray_intersects_rect
from .workspace import Scenario, Screen, ScreenLabel, UserEnv, load_scenario, workspace_center

__all__ = [
    "Aabb",
    "Ray",
    "Rect3",
    "Scenario",
    "Screen",
    "ScreenLabel",
    "UserEnv",
    "Vec3",
    "angular_distance",
    "hausdorff",
    "load_scenario",
    "ray_intersects_rect",
    "workspace_center",
]
