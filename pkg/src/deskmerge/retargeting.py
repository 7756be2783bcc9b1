"""Remote-avatar retargeting as a deterministic, sample-driven state machine.

The *source* user's tracked poses arrive in the source's local frame; outputs
are head/hand targets for the source's avatar as rendered in the *viewer's*
frame (the other user). States cycle Streaming -> Targeting -> Adjusting ->
Returning -> Streaming, with Targeting re-entered whenever the interaction
switches to a new target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Optional

from .geometry import Ray, Rect3, Vec3, ray_hits_sphere, ray_intersects_rect
from .mapping import MappingError, MergedWorkspace

AVATAR = "@avatar"
AVATAR_RADIUS = 0.3
_EPS = 1e-9


class Mode(str, Enum):
    STREAMING = "streaming"
    TARGETING = "targeting"
    ADJUSTING = "adjusting"
    RETURNING = "returning"


LEGAL_TRANSITIONS = frozenset(
    {
        (Mode.STREAMING, Mode.TARGETING),
        (Mode.TARGETING, Mode.ADJUSTING),
        (Mode.TARGETING, Mode.TARGETING),
        (Mode.ADJUSTING, Mode.TARGETING),
        (Mode.ADJUSTING, Mode.RETURNING),
        (Mode.RETURNING, Mode.STREAMING),
        (Mode.RETURNING, Mode.TARGETING),
    }
)


@dataclass(frozen=True)
class RetargetParams:
    p_t_hand: float = 0.1
    p_t_head: float = 0.3
    s_t: float = 0.5
    b_scale: float = 1.3
    D_r: float = 0.42

    def __post_init__(self):
        if min(self.p_t_hand, self.p_t_head, self.s_t, self.D_r) <= 0 or self.b_scale < 1:
            raise ValueError("retargeting parameters must be positive with b_scale >= 1")

    def dwell(self, modality: str) -> float:
        return self.p_t_hand if modality == "hand" else self.p_t_head


@dataclass(frozen=True)
class PoseSample:
    t: float
    head_pos: Vec3
    head_dir: Vec3
    hand_pos: Vec3
    hand_tracked: bool = True


@dataclass(frozen=True)
class Dwell:
    """Continuous on-candidate time of one pointing modality."""

    candidate: Optional[str] = None
    elapsed: float = 0.0

    def ready(self, threshold: float) -> bool:
        return self.candidate is not None and self.elapsed >= threshold - _EPS


@dataclass(frozen=True)
class RetargetState:
    mode: Mode = Mode.STREAMING
    target: Optional[str] = None
    modality: Optional[str] = None  # modality that acquired the target
    hand: Dwell = Dwell()
    head: Dwell = Dwell()
    away_clock: float = 0.0
    interp_clock: float = 0.0
    interp_from: Optional[tuple[Vec3, Vec3]] = None
    uv: tuple[float, float] = (0.5, 0.5)
    last: Optional[tuple[Vec3, Vec3]] = None

    @property
    def dwell_clock(self) -> float:
        return max(self.hand.elapsed, self.head.elapsed)


@dataclass(frozen=True)
class AvatarOutput:
    t: float
    head_pos: Vec3  # avatar head, viewer frame
    head_target: Vec3
    hand_target: Vec3
    highlighted_link: Optional[str]
    state: Mode


@dataclass(frozen=True)
class Detection:
    """Per-sample pointing analysis."""

    target: Optional[str]  # newly acquired or switched-to target, if any
    modality: Optional[str]
    retained: bool  # current target still inside its enlarged bounds
    uv: Optional[tuple[float, float]]  # pointed coordinates on the current target
    hand: Dwell
    head: Dwell


def _rays(sample: PoseSample) -> dict[str, Ray]:
    rays = {}
    if sample.hand_tracked and (sample.hand_pos - sample.head_pos).norm() > _EPS:
        rays["hand"] = Ray.through(sample.head_pos, sample.hand_pos)
    if sample.head_dir.norm() > _EPS:
        rays["head"] = Ray(sample.head_pos, sample.head_dir.unit())
    return rays


def _link_rect(merged: MergedWorkspace, link_id: str, user: int, scale: float = 1.0) -> Rect3:
    ln = merged.link(link_id)
    rect = Rect3.centered(ln.pos(user), ln.dims.x, ln.dims.y)
    return rect.scaled(scale) if scale != 1.0 else rect


def _hit(ray: Ray, merged: MergedWorkspace, cand: str, source: int, scale: float) -> Optional[float]:
    if cand == AVATAR:
        return ray_hits_sphere(ray, merged.avatars[source], AVATAR_RADIUS * scale)
    return ray_intersects_rect(ray, _link_rect(merged, cand, source, scale))


def _observe(ray: Ray, merged: MergedWorkspace, current: Optional[str], source: int, b_scale: float) -> Optional[str]:
    """Candidate under the ray; the current target keeps its enlarged bounds."""
    if current is not None and _hit(ray, merged, current, source, b_scale) is not None:
        return current
    best, best_t = None, math.inf
    for cand in [ln.screen_id for ln in merged.links] + [AVATAR]:
        t = _hit(ray, merged, cand, source, 1.0)
        if t is not None and t < best_t:
            best, best_t = cand, t
    return best


def _advance(d: Dwell, obs: Optional[str], dt: float) -> Dwell:
    if obs is None:
        return Dwell()
    if obs == d.candidate:
        return Dwell(obs, d.elapsed + dt)
    return Dwell(obs, 0.0)


def detect_interaction(
    sample: PoseSample,
    merged: MergedWorkspace,
    prev: RetargetState,
    params: RetargetParams,
    dt: float = 0.0,
    source: int = 0,
) -> Detection:
    """Dwell and hysteresis analysis of one sample.

    A target is reported once a modality's ray has stayed on the same
    candidate for at least that modality's dwell threshold. Hand pointing wins
    over head gaze when both qualify.
    """
    rays = _rays(sample)
    current = prev.target
    obs = {m: _observe(r, merged, current, source, params.b_scale) for m, r in rays.items()}
    hand = _advance(prev.hand, obs.get("hand"), dt)
    head = _advance(prev.head, obs.get("head"), dt)
    retained = current is not None and current in obs.values()

    uv = None
    if current is not None and current != AVATAR:
        for m in ("hand", "head"):
            if obs.get(m) == current:
                rect = _link_rect(merged, current, source)
                t = _hit(rays[m], merged, current, source, params.b_scale)
                u, v = rect.local_coords(rays[m].at(t))
                uv = (min(1.0, max(0.0, u)), min(1.0, max(0.0, v)))
                break

    target, modality = None, None
    hand_driving = obs.get("hand") is not None
    for m, d in (("hand", hand), ("head", head)):
        if m == "head" and hand_driving and current is not None:
            break  # an active hand ray owns the interaction
        if d.ready(params.dwell(m)) and d.candidate != current:
            target, modality = d.candidate, m
            break
    return Detection(target, modality, retained, uv, hand, head)


def _mirror(v: Vec3, on: bool) -> Vec3:
    return Vec3(-v.x, v.y, v.z) if on else v


def _lerp(a: Vec3, b: Vec3, alpha: float) -> Vec3:
    return a + (b - a).scale(alpha)


def _streamed(sample: PoseSample, merged: MergedWorkspace, source: int) -> tuple[Vec3, Vec3, Vec3]:
    """(avatar head, gaze point, hand) of the plain streamed pose in the viewer frame."""
    viewer = 1 - source
    seat = merged.heads[source]
    anchor = merged.avatars[viewer]
    mirror = merged.mirror_streaming
    head = anchor + _mirror(sample.head_pos - seat, mirror)
    gaze = head + _mirror(sample.head_dir.unit() if sample.head_dir.norm() > _EPS else Vec3(0, 0, 1), mirror)
    hand = anchor + _mirror(sample.hand_pos - seat, mirror)
    return head, gaze, hand


def _goal(target: str, uv, merged: MergedWorkspace, avatar_head: Vec3, source: int, params: RetargetParams):
    """(head target, hand target) pointing at the viewer-side counterpart of ``target``."""
    viewer = 1 - source
    if target == AVATAR:
        point = merged.heads[viewer]
    else:
        point = _link_rect(merged, target, viewer).point_at(*uv)
    ray = point - avatar_head
    hand = avatar_head + ray.unit().scale(params.D_r) if ray.norm() > _EPS else avatar_head
    return point, hand


def step(
    state: RetargetState,
    sample: PoseSample,
    merged: MergedWorkspace,
    params: RetargetParams,
    dt: float,
    source: int = 0,
) -> tuple[RetargetState, AvatarOutput]:
    if dt < 0:
        raise ValueError("time step must be non-negative")
    if state.target is not None and state.target != AVATAR:
        merged.link(state.target)  # raises MappingError if the link vanished

    det = detect_interaction(sample, merged, state, params, dt, source)
    head, gaze, hand = _streamed(sample, merged, source)
    last = state.last if state.last is not None else (gaze, hand)
    mode, target, modality = state.mode, state.target, state.modality
    uv = det.uv if det.uv is not None else state.uv
    away = 0.0 if det.retained else state.away_clock + dt
    clock = min(params.s_t, state.interp_clock + dt)
    interp_from = state.interp_from

    if det.target is not None:
        # new interaction, or a switch to a different target
        mode, target, modality = Mode.TARGETING, det.target, det.modality
        clock, interp_from, away = 0.0, last, 0.0
        if det.uv is None:
            uv = (0.5, 0.5)
            if target != AVATAR:
                for m, ray in _rays(sample).items():
                    t = _hit(ray, merged, target, source, 1.0)
                    if t is not None:
                        rect = _link_rect(merged, target, source)
                        uv = tuple(min(1.0, max(0.0, c)) for c in rect.local_coords(ray.at(t)))
                        break
    elif mode is Mode.ADJUSTING and away >= params.dwell(modality) - _EPS:
        mode, target, modality = Mode.RETURNING, None, None
        clock, interp_from = 0.0, last

    if mode is Mode.STREAMING:
        out = (gaze, hand)
    elif mode is Mode.RETURNING:
        alpha = clock / params.s_t
        if alpha >= 1 - _EPS:
            mode, out = Mode.STREAMING, (gaze, hand)
        else:
            out = (_lerp(interp_from[0], gaze, alpha), _lerp(interp_from[1], hand, alpha))
    else:
        goal = _goal(target, uv, merged, head, source, params)
        if mode is Mode.TARGETING:
            alpha = clock / params.s_t
            if alpha >= 1 - _EPS:
                mode, out = Mode.ADJUSTING, goal
            else:
                out = (_lerp(interp_from[0], goal[0], alpha), _lerp(interp_from[1], goal[1], alpha))
        else:
            out = goal

    new = replace(
        state,
        mode=mode,
        target=target,
        modality=modality,
        hand=det.hand,
        head=det.head,
        away_clock=away if target is not None else 0.0,
        interp_clock=clock,
        interp_from=interp_from,
        uv=uv,
        last=out,
    )
    highlighted = target if target not in (None, AVATAR) else None
    return new, AvatarOutput(sample.t, head, out[0], out[1], highlighted, mode)


def run_stream(
    stream: Iterable[PoseSample],
    merged: MergedWorkspace,
    params: RetargetParams = RetargetParams(),
    source: int = 0,
) -> list[AvatarOutput]:
    """Fold :func:`step` over a time-ordered stream, starting in Streaming."""
    samples = list(stream)
    for a, b in zip(samples, samples[1:]):
        if b.t < a.t:
            raise ValueError(f"stream timestamps go backwards at t={b.t}")
    state = RetargetState()
    outputs = []
    prev_t = None
    for s in samples:
        dt = 0.0 if prev_t is None else s.t - prev_t
        state, out = step(state, s, merged, params, dt, source)
        outputs.append(out)
        prev_t = s.t
    return outputs


# --- line-delimited records ---------------------------------------------------


def pose_from_record(rec: dict) -> PoseSample:
    return PoseSample(
        float(rec["t"]),
        Vec3.of(rec["head_pos"]),
        Vec3.of(rec["head_dir"]),
        Vec3.of(rec["hand_pos"]),
        bool(rec.get("hand_tracked", True)),
    )


def pose_to_record(p: PoseSample) -> dict:
    return {
        "t": p.t,
        "head_pos": list(p.head_pos),
        "head_dir": list(p.head_dir),
        "hand_pos": list(p.hand_pos),
        "hand_tracked": p.hand_tracked,
    }


def output_to_record(o: AvatarOutput) -> dict:
    return {
        "t": o.t,
        "state": o.state.value,
        "head_pos": list(o.head_pos),
        "head_target": list(o.head_target),
        "hand_target": list(o.hand_target),
        "highlighted_link": o.highlighted_link,
    }
