"""Screen semantic values and greedy hosting of Shared screens on remote Available monitors."""

from __future__ import annotations

from dataclasses import dataclass, field

from .geometry import GeometryError, angular_distance
from .voxelizer import gaussian_utility
from .workspace import Scenario, Screen, ScreenLabel, UserEnv


@dataclass(frozen=True)
class FixedPair:
    shared: str
    host: str
    host_user: int


@dataclass(frozen=True)
class PreSolveResult:
    fixed_pairs: tuple[FixedPair, ...]
    pools: tuple[tuple[Screen, ...], tuple[Screen, ...]]  # screens each user must place
    values: dict[str, float] = field(default_factory=dict)

    @property
    def residual_screens(self) -> list[Screen]:
        """Distinct screens entering optimization, ordered by id."""
        seen = {s.id: s for pool in self.pools for s in pool}
        return [seen[k] for k in sorted(seen)]

    @property
    def needs_optimization(self) -> bool:
        return any(self.pools)

    def host_of(self, sid: str) -> FixedPair | None:
        for p in self.fixed_pairs:
            if p.shared == sid:
                return p
        return None


def screen_semantic_value(s: Screen, env: UserEnv, mu: float, sigma: float) -> float:
    center_dir = env.center_dir
    to_screen = s.center - env.head_pos
    if to_screen.norm() == 0:
        raise GeometryError(f"screen {s.id} center coincides with the user's head")
    if center_dir.norm() == 0:
        raise GeometryError(f"user {env.user}: workspace center coincides with the head")
    return gaussian_utility(angular_distance(center_dir, to_screen), mu, sigma)


def _by_value(screens, values):
    return sorted(screens, key=lambda s: (-values[s.id], s.id))


def presolve(scn: Scenario) -> PreSolveResult:
    mu, sigma = scn.params.mu, scn.params.sigma
    values = {}
    for env in scn.users:
        for s in env.screens:
            if s.label is not ScreenLabel.PRIVATE:
                values[s.id] = screen_semantic_value(s, env, mu, sigma)

    pairs = []
    for sharer, host in ((0, 1), (1, 0)):
        shared = [s for s in scn.users[sharer].screens if s.label is ScreenLabel.SHARED]
        avail = [s for s in scn.users[host].screens if s.label is ScreenLabel.AVAILABLE and s.physical]
        for s, h in zip(_by_value(shared, values), _by_value(avail, values)):
            pairs.append(FixedPair(s.id, h.id, host))

    paired = {p.shared for p in pairs}
    pools = []
    for u in (0, 1):
        own = [s for s in scn.users[u].screens if s.movable and s.id not in paired]
        remote = [s for s in scn.users[1 - u].screens if s.label is ScreenLabel.SHARED and s.id not in paired]
        pools.append(tuple(sorted(own + remote, key=lambda s: s.id)))
    return PreSolveResult(tuple(pairs), (pools[0], pools[1]), values)
