"""Independent re-validation of placement constraints, straight from the grids' cell sets."""

from __future__ import annotations

from itertools import combinations

from .problem import Assignment, Problem
from .voxelizer import footprint, footprint_dims


def placement_cells(prob: Problem, user: int, sid: str, cid: int) -> set[int]:
    grid = prob.grids[user]
    screen = prob.scenario.screen(sid)
    return set(footprint(grid, cid, footprint_dims(screen, grid.size)))


def anchor_violation(prob: Problem, user: int, sid: str, cid: int) -> str | None:
    grid = prob.grids[user]
    if cid not in grid.containers:
        return f"user {user}: {sid} anchored at missing container {cid}"
    fw, fh = footprint_dims(prob.scenario.screen(sid), grid.size)
    i, j, k = grid.index(cid)
    if i + fw > grid.shape[0] or j + fh > grid.shape[1]:
        return f"user {user}: {sid} footprint leaves the grid"
    missing = [c for c in placement_cells(prob, user, sid, cid) if c not in grid.containers]
    if missing:
        return f"user {user}: {sid} footprint covers removed cells {sorted(missing)[:3]}"
    return None


def pair_violation(prob: Problem, user: int, a: tuple[str, int], b: tuple[str, int]) -> str | None:
    """Occupancy (one screen per cell) and occlusion conflicts between two placements."""
    cells_a = placement_cells(prob, user, *a)
    cells_b = placement_cells(prob, user, *b)
    if cells_a & cells_b:
        return f"user {user}: {a[0]} and {b[0]} share cells"
    grid = prob.grids[user]
    for src, dst, names in ((cells_a, cells_b, (a[0], b[0])), (cells_b, cells_a, (b[0], a[0]))):
        for c in src:
            if grid.containers[c].occludes & dst:
                return f"user {user}: {names[0]} occludes {names[1]}"
    return None


def check(prob: Problem, asg: Assignment) -> list[str]:
    """All constraint violations of ``asg``; empty when it is a valid layout."""
    problems = []
    for u in (0, 1):
        expected = {s.id for s in prob.presolve.pools[u]}
        got = {sid for (sid, uu) in asg.pairs if uu == u}
        for sid in sorted(expected - got):
            problems.append(f"user {u}: {sid} not placed")
        for sid in sorted(got - expected):
            problems.append(f"user {u}: {sid} placed but not in the pool")
        placed = sorted((sid, cid) for (sid, uu), cid in asg.pairs.items() if uu == u)
        bad = False
        for sid, cid in placed:
            msg = anchor_violation(prob, u, sid, cid)
            if msg:
                problems.append(msg)
                bad = True
        if bad:
            continue
        for a, b in combinations(placed, 2):
            msg = pair_violation(prob, u, a, b)
            if msg:
                problems.append(msg)
    return problems
