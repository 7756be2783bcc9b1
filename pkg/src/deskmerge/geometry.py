"""3D value types and metrics shared by every other module.

Frame convention: +x to the user's right, +y up, +z forward (from the seated
user toward their workspace). Lengths are meters, angles radians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

EPS = 1e-9


class GeometryError(ValueError):
    """Raised for degenerate geometric input (empty clouds, zero vectors)."""


class Vec3(NamedTuple):
    x: float
    y: float
    z: float

    def __add__(self, other: Sequence[float]) -> "Vec3":  # type: ignore[override]
        return Vec3(self.x + other[0], self.y + other[1], self.z + other[2])

    def __sub__(self, other: Sequence[float]) -> "Vec3":
        return Vec3(self.x - other[0], self.y - other[1], self.z - other[2])

    def scale(self, k: float) -> "Vec3":
        return Vec3(self.x * k, self.y * k, self.z * k)

    def dot(self, other: Sequence[float]) -> float:
        return self.x * other[0] + self.y * other[1] + self.z * other[2]

    def norm(self) -> float:
        return math.sqrt(self.dot(self))

    def unit(self) -> "Vec3":
        n = self.norm()
        if n == 0.0 or not math.isfinite(n):
            raise GeometryError("cannot normalize a zero-length vector")
        return self.scale(1.0 / n)

    @classmethod
    def of(cls, values: Iterable[float]) -> "Vec3":
        x, y, z = (float(v) for v in values)
        v = cls(x, y, z)
        if not all(math.isfinite(c) for c in v):
            raise GeometryError(f"non-finite vector {v}")
        return v


ORIGIN = Vec3(0.0, 0.0, 0.0)
RIGHT = Vec3(1.0, 0.0, 0.0)
UP = Vec3(0.0, 1.0, 0.0)
FORWARD = Vec3(0.0, 0.0, 1.0)


@dataclass(frozen=True)
class Aabb:
    min: Vec3
    max: Vec3

    def __post_init__(self) -> None:
        if any(lo > hi for lo, hi in zip(self.min, self.max)):
            raise GeometryError(f"Aabb min {self.min} exceeds max {self.max}")

    @property
    def size(self) -> Vec3:
        return self.max - self.min

    @property
    def center(self) -> Vec3:
        return (self.min + self.max).scale(0.5)

    def intersects(self, other: "Aabb", eps: float = EPS) -> bool:
        """Closed-box overlap test: touching faces count as intersecting."""
        return all(
            a_lo <= b_hi + eps and b_lo <= a_hi + eps
            for a_lo, a_hi, b_lo, b_hi in zip(self.min, self.max, other.min, other.max)
        )

    def contains(self, other: "Aabb", eps: float = EPS) -> bool:
        return all(
            o_lo >= s_lo - eps and o_hi <= s_hi + eps
            for s_lo, s_hi, o_lo, o_hi in zip(self.min, self.max, other.min, other.max)
        )


@dataclass(frozen=True)
class Ray:
    origin: Vec3
    direction: Vec3

    def __post_init__(self) -> None:
        if abs(self.direction.norm() - 1.0) > EPS:
            raise GeometryError("ray direction must be a unit vector")

    @classmethod
    def through(cls, origin: Vec3, target: Vec3) -> "Ray":
        return cls(origin, (target - origin).unit())

    def at(self, t: float) -> Vec3:
        return self.origin + self.direction.scale(t)


@dataclass(frozen=True)
class Rect3:
    """A planar rectangle spanned from its bottom-left ``origin``."""

    origin: Vec3
    u_axis: Vec3
    v_axis: Vec3
    width: float
    height: float

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise GeometryError("rectangle extents must be positive")
        if abs(self.u_axis.dot(self.v_axis)) > EPS:
            raise GeometryError("rectangle axes must be orthogonal")

    @classmethod
    def facing_user(cls, origin: Vec3, width: float, height: float) -> "Rect3":
        """Fronto-parallel rectangle (normal along z), width along +x, height along +y."""
        return cls(origin, RIGHT, UP, width, height)

    @classmethod
    def centered(cls, center: Vec3, width: float, height: float) -> "Rect3":
        return cls.facing_user(center - Vec3(width / 2, height / 2, 0.0), width, height)

    @property
    def normal(self) -> Vec3:
        u, v = self.u_axis, self.v_axis
        return Vec3(u.y * v.z - u.z * v.y, u.z * v.x - u.x * v.z, u.x * v.y - u.y * v.x)

    @property
    def center(self) -> Vec3:
        return self.point_at(0.5, 0.5)

    def point_at(self, u: float, v: float) -> Vec3:
        """Point at normalized rectangle coordinates (0,0 bottom-left, 1,1 top-right)."""
        return self.origin + self.u_axis.scale(u * self.width) + self.v_axis.scale(v * self.height)

    def local_coords(self, p: Vec3) -> tuple[float, float]:
        d = p - self.origin
        return d.dot(self.u_axis) / self.width, d.dot(self.v_axis) / self.height

    def scaled(self, k: float) -> "Rect3":
        """Same rectangle scaled by ``k`` about its center."""
        w, h = self.width * k, self.height * k
        c = self.center
        origin = c - self.u_axis.scale(w / 2) - self.v_axis.scale(h / 2)
        return Rect3(origin, self.u_axis, self.v_axis, w, h)


def ray_intersects_rect(r: Ray, rect: Rect3, eps: float = EPS) -> Optional[float]:
    """Parametric hit distance of ``r`` on the closed rectangle, or None."""
    n = rect.normal
    denom = r.direction.dot(n)
    if abs(denom) < 1e-12:
        return None
    t = (rect.origin - r.origin).dot(n) / denom
    if t < -eps:
        return None
    u, v = rect.local_coords(r.at(t))
    # boundary tolerance is expressed in meters, not normalized units
    tu, tv = eps / rect.width, eps / rect.height
    if -tu <= u <= 1 + tu and -tv <= v <= 1 + tv:
        return max(t, 0.0)
    return None


def ray_hits_sphere(r: Ray, center: Vec3, radius: float) -> Optional[float]:
    oc = r.origin - center
    b = oc.dot(r.direction)
    c = oc.dot(oc) - radius * radius
    disc = b * b - c
    if disc < 0:
        return None
    root = math.sqrt(disc)
    for t in (-b - root, -b + root):
        if t >= 0:
            return t
    return None


def angular_distance(a: Sequence[float], b: Sequence[float]) -> float:
    """Angle in [0, pi] between two nonzero vectors."""
    va, vb = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    na, nb = np.linalg.norm(va), np.linalg.norm(vb)
    if na == 0.0 or nb == 0.0:
        raise GeometryError("angular distance of a zero-length vector")
    # atan2 stays accurate for nearly parallel vectors, where acos of the cosine does not
    return math.atan2(float(np.linalg.norm(np.cross(va, vb))), float(np.dot(va, vb)))


def _as_cloud(points: Iterable[Sequence[float]]) -> np.ndarray:
    arr = np.asarray(list(points) if not isinstance(points, np.ndarray) else points, dtype=float)
    if arr.size == 0:
        raise GeometryError("Hausdorff distance of an empty point set")
    return arr.reshape(-1, 3)


def directed_hausdorff(x: np.ndarray, y: np.ndarray) -> float:
    """sup over x of the distance to the nearest point of y."""
    d = np.linalg.norm(x[:, None, :] - y[None, :, :], axis=-1)
    return float(d.min(axis=1).max())


def hausdorff(xs: Iterable[Sequence[float]], ys: Iterable[Sequence[float]]) -> float:
    """Symmetric Hausdorff distance between two non-empty point clouds (L2)."""
    x, y = _as_cloud(xs), _as_cloud(ys)
    d = np.linalg.norm(x[:, None, :] - y[None, :, :], axis=-1)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))
