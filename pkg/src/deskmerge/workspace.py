"""Users, screens, labels and scenario ingestion."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Any, Mapping, Union

import numpy as np
from pydantic import ValidationError

from .geometry import Aabb, GeometryError, Rect3, Vec3
from .schema import ScenarioDoc


class ScenarioError(ValueError):
    """Invalid scenario document; ``path`` points at the offending entry."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


class ScreenLabel(str, Enum):
    PRIVATE = "private"
    SHARED = "shared"
    AVAILABLE = "available"


class Side(str, Enum):
    LEFT = "left"
    RIGHT = "right"


class SolverMode(str, Enum):
    EXACT = "exact"
    BEAM = "beam"
    ORACLE = "oracle"


@dataclass(frozen=True)
class Weights:
    a: float = 0.2
    m: float = 0.2
    v: float = 0.5
    p: float = 0.1


@dataclass(frozen=True)
class SolveParams:
    mode: SolverMode = SolverMode.EXACT
    beam_width: int = 8
    top_k: int = 50  # 0 keeps every feasible anchor
    time_limit: float = 60.0
    tolerance: float = 1e-9


@dataclass(frozen=True)
class Params:
    weights: Weights = Weights()
    voxel_size: float = 0.1
    mu: float = 0.0
    sigma: float = math.pi / 6
    solver: SolveParams = SolveParams()


@dataclass(frozen=True)
class Screen:
    id: str
    owner: int
    physical: bool
    label: ScreenLabel
    pos: Vec3  # bottom-left corner
    dims: Vec3  # width, height, thickness

    @property
    def width(self) -> float:
        return self.dims.x

    @property
    def height(self) -> float:
        return self.dims.y

    @property
    def center(self) -> Vec3:
        return screen_center(self.pos, self.dims)

    @property
    def rect(self) -> Rect3:
        return Rect3.facing_user(self.pos, self.width, self.height)

    @property
    def movable(self) -> bool:
        return not self.physical and self.label is not ScreenLabel.PRIVATE


def screen_center(pos: Vec3, dims: Vec3) -> Vec3:
    """Center of a fronto-parallel screen anchored at its bottom-left corner."""
    return Vec3(pos.x + dims.x / 2, pos.y + dims.y / 2, pos.z)


@dataclass(frozen=True)
class UserEnv:
    user: int
    head_pos: Vec3
    avatar_pos: Vec3
    D_u: float
    screens: tuple[Screen, ...] = ()
    obstacles: tuple[Aabb, ...] = ()
    usable_volumes: tuple[Aabb, ...] = ()

    @cached_property
    def workspace_center(self) -> Vec3:
        return workspace_center(self)

    @property
    def avatar_side(self) -> Side:
        lateral = self.avatar_pos.x - self.head_pos.x
        if lateral == 0:
            raise GeometryError("avatar directly in line with the user has no side")
        return Side.RIGHT if lateral > 0 else Side.LEFT

    def depth(self, p: Vec3) -> float:
        """Forward (z) distance of ``p`` from this user's head."""
        return p.z - self.head_pos.z

    @cached_property
    def z_avg(self) -> float:
        if not self.screens:
            return 0.0
        return float(np.mean([self.depth(s.center) for s in self.screens]))

    @property
    def center_dir(self) -> Vec3:
        return self.workspace_center - self.head_pos


@dataclass(frozen=True)
class Scenario:
    users: tuple[UserEnv, UserEnv]
    params: Params = field(default_factory=Params)

    @property
    def env_a(self) -> UserEnv:
        return self.users[0]

    @property
    def env_b(self) -> UserEnv:
        return self.users[1]

    def screens(self) -> list[Screen]:
        return [s for env in self.users for s in env.screens]

    def screen(self, sid: str) -> Screen:
        for s in self.screens():
            if s.id == sid:
                return s
        raise KeyError(sid)


def workspace_center(env: UserEnv) -> Vec3:
    """Mean of the user's screen centers before integration."""
    if not env.screens:
        raise GeometryError(f"user {env.user} has no screens; workspace center undefined")
    c = np.mean([s.center for s in env.screens], axis=0)
    return Vec3.of(c)


# --- document ingestion -----------------------------------------------------


def _loc_to_path(loc: tuple) -> str:
    path = "$"
    for part in loc:
        path += f"[{part}]" if isinstance(part, int) else f".{part}"
    return path


def _box(doc, path: str) -> Aabb:
    try:
        return Aabb(Vec3.of(doc.min), Vec3.of(doc.max))
    except GeometryError as exc:
        raise ScenarioError(str(exc), path) from None


def _params_from_doc(doc) -> Params:
    w, s = doc.weights, doc.solver
    return Params(
        weights=Weights(w.a, w.m, w.v, w.p),
        voxel_size=doc.voxel_size,
        mu=doc.mu,
        sigma=doc.sigma,
        solver=SolveParams(
            mode=SolverMode(s.mode),
            beam_width=s.beam_width,
            top_k=s.top_k,
            time_limit=s.time_limit_s,
        ),
    )


def scenario_from_doc(doc: ScenarioDoc) -> Scenario:
    seen: dict[str, str] = {}
    envs = []
    for u, udoc in enumerate(doc.users):
        base = f"$.users[{u}]"
        screens = []
        head = Vec3.of(udoc.head_pos)
        for i, sdoc in enumerate(udoc.screens):
            path = f"{base}.screens[{i}]"
            if sdoc.id in seen:
                raise ScenarioError(f"duplicate screen id {sdoc.id!r} (first at {seen[sdoc.id]})", f"{path}.id")
            seen[sdoc.id] = path
            dims = Vec3.of(sdoc.dims)
            if dims.x <= 0 or dims.y <= 0 or dims.z < 0:
                raise ScenarioError("width and height must be > 0, thickness >= 0", f"{path}.dims")
            screen = Screen(sdoc.id, u, sdoc.physical, ScreenLabel(sdoc.label), Vec3.of(sdoc.pos), dims)
            if screen.center.z - head.z < 0:
                raise ScenarioError("screen lies behind the user", f"{path}.pos")
            screens.append(screen)
        env = UserEnv(
            user=u,
            head_pos=head,
            avatar_pos=Vec3.of(udoc.avatar_pos),
            D_u=udoc.D_u,
            screens=tuple(screens),
            obstacles=tuple(_box(b, f"{base}.obstacles[{i}]") for i, b in enumerate(udoc.obstacles)),
            usable_volumes=tuple(_box(b, f"{base}.usable_volumes[{i}]") for i, b in enumerate(udoc.usable_volumes)),
        )
        if env.avatar_pos.x == env.head_pos.x:
            raise ScenarioError("avatar must sit to the left or right of the user", f"{base}.avatar_pos")
        envs.append(env)
    return Scenario((envs[0], envs[1]), _params_from_doc(doc.params))


def load_scenario(source: Union[str, bytes, Mapping[str, Any]]) -> Scenario:
    """Parse and validate a scenario document (JSON text or an already-decoded mapping)."""
    if isinstance(source, (str, bytes)):
        try:
            source = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"malformed JSON: {exc}") from None
    try:
        doc = ScenarioDoc.model_validate(source)
    except ValidationError as exc:
        err = exc.errors()[0]
        raise ScenarioError(err["msg"], _loc_to_path(err["loc"])) from None
    return scenario_from_doc(doc)


def load_scenario_file(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return load_scenario(fh.read())


def params_to_doc(p: Params) -> dict:
    return {
        "weights": {"a": p.weights.a, "m": p.weights.m, "v": p.weights.v, "p": p.weights.p},
        "voxel_size": p.voxel_size,
        "mu": p.mu,
        "sigma": p.sigma,
        "solver": {
            "mode": p.solver.mode.value,
            "beam_width": p.solver.beam_width,
            "top_k": p.solver.top_k,
            "time_limit_s": p.solver.time_limit,
        },
    }


def _box_doc(b: Aabb) -> dict:
    return {"min": list(b.min), "max": list(b.max)}


def scenario_to_doc(scn: Scenario) -> dict:
    """Inverse of :func:`load_scenario`, with every default made explicit."""
    users = []
    for env in scn.users:
        users.append(
            {
                "head_pos": list(env.head_pos),
                "avatar_pos": list(env.avatar_pos),
                "D_u": env.D_u,
                "screens": [
                    {"id": s.id, "physical": s.physical, "label": s.label.value, "pos": list(s.pos), "dims": list(s.dims)}
                    for s in env.screens
                ],
                "obstacles": [_box_doc(b) for b in env.obstacles],
                "usable_volumes": [_box_doc(b) for b in env.usable_volumes],
            }
        )
    return {"users": users, "params": params_to_doc(scn.params)}
