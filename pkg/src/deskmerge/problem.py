"""The assembled optimization instance and the assignment type."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .geometry import Vec3
from .presolver import PreSolveResult, presolve
from .voxelizer import VoxelGrid, build_grid
from .workspace import Scenario, Screen, ScreenLabel, screen_center


@dataclass(frozen=True)
class Assignment:
    """Container anchor per (screen id, user) for every pooled screen."""

    pairs: Mapping[tuple[str, int], int] = field(default_factory=dict)

    def items(self):
        return sorted(self.pairs.items())


@dataclass
class Problem:
    scenario: Scenario
    presolve: PreSolveResult
    grids: tuple[VoxelGrid, VoxelGrid]

    @property
    def weights(self):
        return self.scenario.params.weights

    def container(self, user: int, cid: int):
        return self.grids[user].containers[cid]

    def placed_center(self, screen: Screen, user: int, cid: int) -> Vec3:
        return screen_center(self.container(user, cid).p_c, screen.dims)

    def view(self, asg: Assignment, user: int) -> dict[str, Vec3]:
        """Center of every screen visible in ``user``'s merged workspace."""
        scn = self.scenario
        out: dict[str, Vec3] = {}
        for s in scn.users[user].screens:
            cid = asg.pairs.get((s.id, user))
            out[s.id] = s.center if cid is None else self.placed_center(s, user, cid)
        for s in scn.users[1 - user].screens:
            if s.label is not ScreenLabel.SHARED:
                continue
            pair = self.presolve.host_of(s.id)
            if pair is not None:
                out[s.id] = scn.screen(pair.host).center
            elif (s.id, user) in asg.pairs:
                out[s.id] = self.placed_center(s, user, asg.pairs[(s.id, user)])
        return out

    def shared_ids(self) -> list[str]:
        return sorted(s.id for s in self.scenario.screens() if s.label is ScreenLabel.SHARED)

    def own_ids(self, user: int) -> list[str]:
        return sorted(s.id for s in self.scenario.users[user].screens if s.label is not ScreenLabel.PRIVATE)


def build_problem(scn: Scenario, pre: Optional[PreSolveResult] = None, threads: int = 1) -> Problem:
    """Pre-solve and voxelize both users; ``threads`` > 1 builds the two grids concurrently."""
    p = scn.params
    pre = presolve(scn) if pre is None else pre
    with ThreadPoolExecutor(max_workers=max(1, min(threads, 2))) as pool:
        grids = list(pool.map(lambda env: build_grid(env, p.voxel_size, p.mu, p.sigma), scn.users))
    return Problem(scn, pre, (grids[0], grids[1]))
