"""Pydantic models for the JSON documents exchanged by the CLI and the HTTP API."""

from __future__ import annotations

import math
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

Vector = tuple[float, float, float]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class BoxDoc(_Strict):
    min: Vector
    max: Vector


class ScreenDoc(_Strict):
    id: str = Field(min_length=1)
    physical: bool = False
    label: Literal["private", "shared", "available"]
    pos: Vector
    dims: Vector


class UserDoc(_Strict):
    head_pos: Vector
    avatar_pos: Vector
    D_u: float = Field(default=0.5, gt=0)
    screens: list[ScreenDoc] = []
    obstacles: list[BoxDoc] = []
    usable_volumes: list[BoxDoc] = []


class WeightsDoc(_Strict):
    a: float = Field(default=0.2, ge=0)
    m: float = Field(default=0.2, ge=0)
    v: float = Field(default=0.5, ge=0)
    p: float = Field(default=0.1, ge=0)


class SolverDoc(_Strict):
    mode: Literal["exact", "beam", "oracle"] = "exact"
    beam_width: int = Field(default=8, ge=1)
    top_k: int = Field(default=50, ge=0)
    time_limit_s: float = Field(default=60.0, gt=0)


class ParamsDoc(_Strict):
    weights: WeightsDoc = WeightsDoc()
    voxel_size: float = Field(default=0.1, gt=0)
    mu: float = 0.0
    sigma: float = Field(default=math.pi / 6, gt=0)
    solver: SolverDoc = SolverDoc()


class ScenarioDoc(_Strict):
    users: list[UserDoc] = Field(min_length=2, max_length=2)
    params: ParamsDoc = ParamsDoc()


class PoseDoc(_Strict):
    t: float
    head_pos: Vector
    head_dir: Vector
    hand_pos: Vector
    hand_tracked: bool = True


class RetargetParamsDoc(_Strict):
    p_t_hand: float = Field(default=0.1, gt=0)
    p_t_head: float = Field(default=0.3, gt=0)
    s_t: float = Field(default=0.5, gt=0)
    b_scale: float = Field(default=1.3, ge=1)
    D_r: float = Field(default=0.42, gt=0)


# --- service request bodies -------------------------------------------------


class MergeRequest(_Strict):
    scenario: ScenarioDoc
    mode: Optional[Literal["exact", "beam", "oracle"]] = None


class ValidateRequest(_Strict):
    scenario: ScenarioDoc


class GenRequest(_Strict):
    combination: Literal["1-2", "2-2", "2-3", "3-3"]
    seed: int = 0


class RetargetRequest(_Strict):
    merged: dict
    stream: list[PoseDoc]
    params: RetargetParamsDoc = RetargetParamsDoc()
    source_user: int = Field(default=0, ge=0, le=1)
