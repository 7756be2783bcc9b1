"""Candidate containers: a uniform voxel lattice over each user's usable space.

Cells are cubes of side ``d_c`` on a lattice anchored at the minimum corner of
the user's usable volumes. A container's anchor ``p_c`` is the cell's
bottom-left-near corner, which doubles as the bottom-left corner of any screen
placed there; the screen footprint then grows along +x and +y within the
anchor's depth layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .geometry import GeometryError, Vec3, angular_distance
from .workspace import Screen, ScreenLabel, UserEnv

_EPS = 1e-9

RULES = ("obstacle", "screen", "proximity")


class NoCapacityError(RuntimeError):
    """Every cell of a user's usable space was filtered out."""

    def __init__(self, grid: "VoxelGrid"):
        super().__init__(f"user {grid.user}: no usable cells survive filtering {grid.removed}")
        self.grid = grid


@dataclass(frozen=True)
class Container:
    id: int
    user: int
    p_c: Vec3
    d_c: Vec3
    z_c: float
    v_c: float
    occludes: frozenset = frozenset()

    @property
    def center(self) -> Vec3:
        return self.p_c + self.d_c.scale(0.5)


@dataclass
class VoxelGrid:
    user: int
    head: Vec3
    origin: np.ndarray
    size: float
    shape: tuple[int, int, int]
    inside: np.ndarray  # cells fully inside a usable volume
    bitmap: np.ndarray  # surviving cells, flat, one entry per lattice cell
    removed: dict[str, int] = field(default_factory=dict)
    containers: dict[int, Container] = field(default_factory=dict)

    @property
    def cell_count(self) -> int:
        return int(np.prod(self.shape))

    @property
    def ids(self) -> list[int]:
        return sorted(self.containers)

    def index(self, cid: int) -> tuple[int, int, int]:
        i, j, k = np.unravel_index(cid, self.shape)
        return int(i), int(j), int(k)

    def flat(self, i: int, j: int, k: int) -> int:
        return int(np.ravel_multi_index((i, j, k), self.shape))

    def alive(self) -> np.ndarray:
        return self.bitmap.reshape(self.shape)

    def cell_min(self, i: int, j: int, k: int) -> Vec3:
        return Vec3.of(self.origin + self.size * np.array([i, j, k], dtype=float))

    def cell_center(self, cid: int) -> Vec3:
        return self.cell_min(*self.index(cid)) + Vec3(self.size / 2, self.size / 2, self.size / 2)


def _lattice(env: UserEnv, d_c: float):
    vols = env.usable_volumes
    if not vols:
        return np.zeros(3), (0, 0, 0)
    lo = np.min([v.min for v in vols], axis=0)
    hi = np.max([v.max for v in vols], axis=0)
    shape = tuple(max(0, math.ceil((h - l) / d_c - _EPS)) for l, h in zip(lo, hi))
    return lo, shape


def _cell_bounds(origin: np.ndarray, d_c: float, shape) -> tuple[np.ndarray, np.ndarray]:
    idx = np.indices(shape).reshape(3, -1).T.astype(float)
    lo = origin + idx * d_c
    return lo, lo + d_c


def _overlap_1d(a_lo, a_hi, b_lo, b_hi):
    return (a_lo <= b_hi + _EPS) & (b_lo <= a_hi + _EPS)


def _screen_conflicts(lo: np.ndarray, hi: np.ndarray, screen: Screen, head: Vec3) -> np.ndarray:
    """Cells intersecting, occluding, or occluded by a fronto-parallel screen."""
    hx, hy, hz = head
    sx0, sy0, zs = screen.pos
    sx1, sy1 = sx0 + screen.width, sy0 + screen.height

    inter = (
        _overlap_1d(lo[:, 0], hi[:, 0], sx0, sx1)
        & _overlap_1d(lo[:, 1], hi[:, 1], sy0, sy1)
        & (lo[:, 2] <= zs + _EPS)
        & (zs <= hi[:, 2] + _EPS)
    )

    # occlusion is tested on the cell's mid-depth face against the screen plane
    dc = (lo[:, 2] + hi[:, 2]) / 2 - hz
    ds = zs - hz
    if ds <= 0:
        return inter
    with np.errstate(divide="ignore", invalid="ignore"):
        # screen nearer than cell: project the screen onto the cell face plane
        k = dc / ds
        px0, px1 = hx + (sx0 - hx) * k, hx + (sx1 - hx) * k
        py0, py1 = hy + (sy0 - hy) * k, hy + (sy1 - hy) * k
        behind = (dc > ds) & _overlap_1d(lo[:, 0], hi[:, 0], px0, px1) & _overlap_1d(lo[:, 1], hi[:, 1], py0, py1)
        # cell nearer than screen: project the cell face onto the screen plane
        k2 = np.where(dc > 0, ds / np.where(dc > 0, dc, 1.0), 0.0)
        qx0, qx1 = hx + (lo[:, 0] - hx) * k2, hx + (hi[:, 0] - hx) * k2
        qy0, qy1 = hy + (lo[:, 1] - hy) * k2, hy + (hi[:, 1] - hy) * k2
        front = (dc > 0) & (dc < ds) & _overlap_1d(qx0, qx1, sx0, sx1) & _overlap_1d(qy0, qy1, sy0, sy1)
    return inter | behind | front


def container_utility(c: Container, head: Vec3, center_dir: Vec3, mu: float, sigma: float) -> float:
    """Gaussian falloff of the anchor's angular offset from the workspace center direction."""
    return gaussian_utility(angular_distance(center_dir, c.p_c - head), mu, sigma)


def gaussian_utility(theta: float, mu: float, sigma: float) -> float:
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return math.exp(-((theta - mu) ** 2) / (2 * sigma * sigma))


def generate(env: UserEnv, d_c: float, mu: float = 0.0, sigma: float = math.pi / 6) -> VoxelGrid:
    """Lattice cells over the usable volumes, filtered by the three removal rules.

    The returned grid has utilities and depths filled in but no occlusion sets;
    see :func:`compute_occlusion`. Raises :class:`NoCapacityError` (carrying the
    grid and its removal counts) when nothing survives.
    """
    if d_c <= 0:
        raise ValueError("voxel size must be positive")
    origin, shape = _lattice(env, d_c)
    lo, hi = _cell_bounds(origin, d_c, shape)
    n = lo.shape[0]

    inside = np.zeros(n, dtype=bool)
    for v in env.usable_volumes:
        inside |= np.all(lo >= np.asarray(v.min) - _EPS, axis=1) & np.all(hi <= np.asarray(v.max) + _EPS, axis=1)

    alive = inside.copy()
    removed = {}

    hit = np.zeros(n, dtype=bool)
    for ob in env.obstacles:
        hit |= np.all(_overlap_1d(lo, hi, np.asarray(ob.min), np.asarray(ob.max)), axis=1)
    removed["obstacle"] = int(np.count_nonzero(alive & hit))
    alive &= ~hit

    hit = np.zeros(n, dtype=bool)
    for s in env.screens:
        if s.physical or s.label is ScreenLabel.PRIVATE:
            hit |= _screen_conflicts(lo, hi, s, env.head_pos)
    removed["screen"] = int(np.count_nonzero(alive & hit))
    alive &= ~hit

    centers = (lo + hi) / 2
    head = np.asarray(env.head_pos)
    near = np.linalg.norm(centers - head, axis=1) < env.D_u
    near |= np.linalg.norm(centers - np.asarray(env.avatar_pos), axis=1) < env.D_u
    near |= centers[:, 2] - head[2] <= 0  # depth must stay positive
    removed["proximity"] = int(np.count_nonzero(alive & near))
    alive &= ~near

    grid = VoxelGrid(env.user, env.head_pos, origin, d_c, shape, inside, alive, removed)
    if not alive.any():
        raise NoCapacityError(grid)

    center_dir = env.center_dir if env.screens else Vec3(0.0, 0.0, 1.0)
    cube = Vec3(d_c, d_c, d_c)
    for cid in np.flatnonzero(alive):
        cid = int(cid)
        p_c = Vec3.of(lo[cid])
        proto = Container(cid, env.user, p_c, cube, float(centers[cid, 2] - head[2]), 0.0)
        try:
            v_c = container_utility(proto, env.head_pos, center_dir, mu, sigma)
        except GeometryError:
            v_c = gaussian_utility(0.0, mu, sigma)  # anchor coincides with the head
        grid.containers[cid] = Container(cid, env.user, p_c, cube, proto.z_c, v_c)
    return grid


def compute_occlusion(grid: VoxelGrid, head: Vec3 | None = None) -> VoxelGrid:
    """Fill each container's ``occludes`` set.

    Container ``c`` occludes ``c2`` when ``c2`` lies in a strictly deeper layer
    and the segment from the head to the center of ``c2`` crosses the closed
    mid-depth face of ``c``. Cells in the same layer never occlude each other.
    """
    head = np.asarray(grid.head if head is None else head, dtype=float)
    alive = grid.alive()
    nx, ny, nz = grid.shape
    d = grid.size
    occ: dict[int, set[int]] = {cid: set() for cid in grid.containers}
    tol = _EPS / d

    layer_z = grid.origin[2] + (np.arange(nz) + 0.5) * d - head[2]
    for k2 in range(nz):
        far = np.argwhere(alive[:, :, k2])
        if far.size == 0:
            continue
        far_centers = grid.origin[:2] + (far + 0.5) * d
        far_ids = np.ravel_multi_index((far[:, 0], far[:, 1], np.full(len(far), k2)), grid.shape)
        for k1 in range(k2):
            if layer_z[k1] <= 0 or not alive[:, :, k1].any():
                continue
            t = layer_z[k1] / layer_z[k2]
            proj = head[:2] + (far_centers - head[:2]) * t
            f = (proj - grid.origin[:2]) / d
            lo_idx = np.floor(f - tol).astype(int)
            hi_idx = np.floor(f + tol).astype(int)
            # a point on a shared face edge lies in up to two cells per axis
            for ci in (lo_idx[:, 0], hi_idx[:, 0]):
                for cj in (lo_idx[:, 1], hi_idx[:, 1]):
                    ok = (ci >= 0) & (ci < nx) & (cj >= 0) & (cj < ny)
                    ok[ok] &= alive[ci[ok], cj[ok], k1]
                    near_ids = np.ravel_multi_index((ci[ok], cj[ok], np.full(ok.sum(), k1)), grid.shape)
                    for near_id, far_id in zip(near_ids.tolist(), far_ids[ok].tolist()):
                        occ[near_id].add(far_id)
    for cid, c in list(grid.containers.items()):
        grid.containers[cid] = Container(c.id, c.user, c.p_c, c.d_c, c.z_c, c.v_c, frozenset(occ[cid]))
    return grid


def footprint_dims(s: Screen, d_c: float) -> tuple[int, int]:
    return math.ceil(s.width / d_c - _EPS), math.ceil(s.height / d_c - _EPS)


def footprint(grid: VoxelGrid, anchor: int, dims: tuple[int, int]) -> list[int]:
    i, j, k = grid.index(anchor)
    fw, fh = dims
    return [grid.flat(i + a, j + b, k) for a in range(fw) for b in range(fh)]


def feasible_anchors(grid: VoxelGrid, s: Screen) -> list[int]:
    """Anchors whose whole footprint consists of surviving cells, ascending by id."""
    return anchors_for_dims(grid, footprint_dims(s, grid.size))


def anchors_for_dims(grid: VoxelGrid, dims: tuple[int, int]) -> list[int]:
    fw, fh = dims
    alive = grid.alive().astype(np.int64)
    nx, ny, nz = grid.shape
    if fw > nx or fh > ny or nz == 0:
        return []
    sat = np.zeros((nx + 1, ny + 1, nz), dtype=np.int64)
    sat[1:, 1:, :] = alive.cumsum(0).cumsum(1)
    window = sat[fw:, fh:] - sat[:-fw, fh:] - sat[fw:, :-fh] + sat[:-fw, :-fh]
    ok = np.argwhere(window == fw * fh)
    ids = np.ravel_multi_index((ok[:, 0], ok[:, 1], ok[:, 2]), grid.shape) if len(ok) else []
    return sorted(int(c) for c in ids)


def build_grid(env: UserEnv, d_c: float, mu: float, sigma: float) -> VoxelGrid:
    """Generate, filter and annotate a user's grid; an empty grid instead of raising."""
    try:
        grid = generate(env, d_c, mu, sigma)
    except NoCapacityError as exc:
        return exc.grid
    return compute_occlusion(grid)
