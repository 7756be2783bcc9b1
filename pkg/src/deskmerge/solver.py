"""Minimize the weighted layout objective over feasible screen placements.

Three modes share one candidate model:

* ``exact`` - depth-first branch-and-bound, seeded with a beam incumbent.
* ``beam`` - level-by-level beam search ranked by the same lower bound.
* ``oracle`` - exhaustive enumeration, evaluated through :mod:`objectives`.

A *slot* is one (user, screen) placement decision. Candidates of a slot are
the feasible anchors of the screen in that user's grid, ordered by a
standalone cost estimate and optionally truncated to ``top_k``.
"""

from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from . import objectives
from .objectives import ObjectiveBreakdown
from .problem import Assignment, Problem
from .voxelizer import anchors_for_dims, footprint, footprint_dims
from .workspace import ScreenLabel, SolveParams, SolverMode

log = logging.getLogger(__name__)

TIE_EPS = 1e-12
ORACLE_LIMIT = 10**7


class Status(str, Enum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    TIMED_OUT = "timed_out"


class OracleTooLarge(RuntimeError):
    pass


@dataclass
class SolveReport:
    assignment: Assignment
    breakdown: Optional[ObjectiveBreakdown]
    status: Status
    nodes_explored: int = 0
    wall_time: float = 0.0
    reason: str = ""


@dataclass
class Slot:
    user: int
    sid: str
    own: bool
    shared: bool
    cands: list[int]
    centers: np.ndarray  # placed screen centers, one row per candidate
    sep: np.ndarray  # weighted V + P contribution per candidate
    mdist: np.ndarray  # distance of the placed center to the owner's pre-merge cloud
    fp_bits: list[int] = field(default_factory=list)
    occ_bits: list[int] = field(default_factory=list)


def _bits(ids) -> int:
    out = 0
    for i in ids:
        out |= 1 << i
    return out


def _dist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.linalg.norm(a[:, None, :] - b[None, :, :], axis=-1)


def _min_dist(points: np.ndarray, cloud: np.ndarray) -> np.ndarray:
    if len(cloud) == 0 or len(points) == 0:
        return np.zeros(len(points))
    return np.linalg.norm(points[:, None, :] - cloud[None, :, :], axis=-1).min(axis=1)


class Model:
    """Precomputed slots, conflict matrices and fixed clouds of one problem."""

    def __init__(self, prob: Problem, top_k: int = 0):
        self.prob = prob
        scn = prob.scenario
        w = scn.params.weights
        self.w = w
        pre = prob.presolve
        n_s = len(pre.residual_screens)

        empty = Assignment({})
        self.before = []  # own non-private screen centers before merging
        self.fixed_after = []  # own screens that keep their place
        self.fixed_shared = []  # shared screens not placed by this user's slots
        for u in (0, 1):
            pool_ids = {s.id for s in pre.pools[u]}
            view = prob.view(empty, u)
            own = prob.own_ids(u)
            self.before.append(np.array([scn.screen(i).center for i in own], dtype=float).reshape(-1, 3))
            self.fixed_after.append(np.array([view[i] for i in own if i not in pool_ids], dtype=float).reshape(-1, 3))
            self.fixed_shared.append(
                np.array([view[i] for i in prob.shared_ids() if i in view and i not in pool_ids], dtype=float).reshape(-1, 3)
            )
        self.has_own = [len(b) > 0 for b in self.before]

        order = sorted(pre.residual_screens, key=lambda s: (-pre.values[s.id], s.id))
        self.slots: list[Slot] = []
        for s in order:
            for u in (0, 1):
                if s not in pre.pools[u]:
                    continue
                grid = prob.grids[u]
                dims = footprint_dims(s, grid.size)
                anchors = anchors_for_dims(grid, dims)
                norm = n_s * 2 * len(grid.containers)
                z_avg = scn.users[u].z_avg
                own = s.owner == u
                shared = s.label is ScreenLabel.SHARED
                rows = []
                for cid in anchors:
                    c = grid.containers[cid]
                    center = np.array([c.p_c.x + s.width / 2, c.p_c.y + s.height / 2, c.p_c.z])
                    sep = w.v * (-pre.values[s.id] * c.v_c / norm) + w.p * (abs(z_avg - c.z_c) / norm)
                    rows.append((cid, center, sep))
                centers = np.array([r[1] for r in rows], dtype=float).reshape(-1, 3)
                sep = np.array([r[2] for r in rows], dtype=float)
                mdist = _min_dist(centers, self.before[u]) if own else np.zeros(len(rows))
                # standalone estimate: V+P plus the pull toward the screen's original spot
                ref = np.array([s.center], dtype=float)
                key = sep + (w.m / 2 * mdist if own else 0.0)
                if shared:
                    key = key + w.a * _min_dist(centers, ref)
                idx = sorted(range(len(rows)), key=lambda i: (key[i], rows[i][0]))
                if top_k:
                    idx = idx[:top_k]
                slot = Slot(
                    u,
                    s.id,
                    own,
                    shared,
                    [rows[i][0] for i in idx],
                    centers[idx].reshape(-1, 3),
                    sep[idx],
                    mdist[idx],
                )
                for cid in slot.cands:
                    cells = footprint(grid, cid, dims)
                    slot.fp_bits.append(_bits(cells))
                    occ = set()
                    for c in cells:
                        occ |= grid.containers[c].occludes
                    slot.occ_bits.append(_bits(occ))
                self.slots.append(slot)

        n = len(self.slots)
        # canonical key order: by (screen id, user)
        self.canon = sorted(range(n), key=lambda i: (self.slots[i].sid, self.slots[i].user))
        self.conf: dict[tuple[int, int], np.ndarray] = {}
        for i in range(n):
            for j in range(i + 1, n):
                a, b = self.slots[i], self.slots[j]
                if a.user != b.user:
                    continue
                m = np.zeros((len(a.cands), len(b.cands)), dtype=bool)
                for x, (fa, oa) in enumerate(zip(a.fp_bits, a.occ_bits)):
                    for y, (fb, ob) in enumerate(zip(b.fp_bits, b.occ_bits)):
                        m[x, y] = bool((fa & (fb | ob)) | (oa & fb))
                self.conf[(i, j)] = m
        self.later_same_user = [[j for j in range(i + 1, n) if self.slots[j].user == self.slots[i].user] for i in range(n)]
        self.own_slots = [[i for i, s in enumerate(self.slots) if s.user == u and s.own] for u in (0, 1)]
        self.shared_slots = [[i for i, s in enumerate(self.slots) if s.user == u and s.shared] for u in (0, 1)]
        self.any_shared = len(prob.shared_ids()) > 0

        # every shared point of one user against every shared point of the other, computed once
        self.agree_points = []
        for u in (0, 1):
            parts = [self.fixed_shared[u]] + [self.slots[i].centers for i in self.shared_slots[u]]
            self.agree_points.append(np.concatenate(parts).reshape(-1, 3))
        self.agree_dist = [_dist(self.agree_points[u], self.agree_points[1 - u]) for u in (0, 1)]
        self.cloud_empty = [len(self.fixed_shared[u]) == 0 and not self.shared_slots[u] for u in (0, 1)]

    # -- search helpers ------------------------------------------------------

    def initial_alive(self) -> list[np.ndarray]:
        return [np.ones(len(s.cands), dtype=bool) for s in self.slots]

    def restrict(self, i: int, choice: int, alive: list[np.ndarray]) -> Optional[list[np.ndarray]]:
        """Forward-check: drop candidates conflicting with slot ``i`` taking ``choice``."""
        out = list(alive)
        for j in self.later_same_user[i]:
            a = alive[j] & ~self.conf[(i, j)][choice]
            if not a.any():
                return None
            out[j] = a
        return out

    def key(self, chosen: list[int]) -> tuple:
        return tuple(self.slots[i].cands[chosen[i]] for i in self.canon)

    def bound(self, depth: int, chosen: list[int], alive: list[np.ndarray]) -> float:
        """Admissible lower bound; exact objective value when every slot is placed."""
        n = len(self.slots)
        w = self.w
        lb = 0.0
        for i in range(depth):
            lb += self.slots[i].sep[chosen[i]]
        for j in range(depth, n):
            lb += self.slots[j].sep[alive[j]].min()

        m_total = 0.0
        for u in (0, 1):
            if not self.has_own[u]:
                continue
            placed = [i for i in self.own_slots[u] if i < depth]
            if len(placed) == len(self.own_slots[u]):
                after = [self.fixed_after[u]] + [self.slots[i].centers[chosen[i]][None, :] for i in placed]
                after = np.concatenate(after)
                d = np.linalg.norm(self.before[u][:, None, :] - after[None, :, :], axis=-1)
                m_total += max(d.min(axis=1).max(), d.min(axis=0).max())
            else:
                part = 0.0
                for i in self.own_slots[u]:
                    v = self.slots[i].mdist[chosen[i]] if i < depth else self.slots[i].mdist[alive[i]].min()
                    part = max(part, v)
                m_total += part
        lb += w.m * m_total / 2

        if self.any_shared and w.a > 0:
            lb += w.a * self._agreement_bound(depth, chosen, alive)
        return float(lb)

    def _agreement_bound(self, depth, chosen, alive) -> float:
        """Placed and fixed points against every point the other cloud may still hold.

        A still-open slot contributes the smallest such distance over its
        remaining candidates.
        """
        if self.cloud_empty[0] or self.cloud_empty[1]:
            return 0.0
        masks, segments = [], []
        for u in (0, 1):
            parts = [np.ones(len(self.fixed_shared[u]), dtype=bool)]
            seg = [(len(self.fixed_shared[u]), False)]
            for i in self.shared_slots[u]:
                if i < depth:
                    m = np.zeros(len(alive[i]), dtype=bool)
                    m[chosen[i]] = True
                    seg.append((1, False))
                else:
                    m = alive[i]
                    seg.append((int(m.sum()), True))
                parts.append(m)
            masks.append(np.concatenate(parts))
            segments.append(seg)
        best = 0.0
        for u in (0, 1):
            d = self.agree_dist[u][masks[u]][:, masks[1 - u]].min(axis=1)
            start = 0
            for n, pending in segments[u]:
                if n:
                    chunk = d[start : start + n]
                    best = max(best, float(chunk.min() if pending else chunk.max()))
                start += n
        return best

    def assignment(self, chosen: list[int]) -> Assignment:
        return Assignment({(s.sid, s.user): s.cands[c] for s, c in zip(self.slots, chosen)})


def _better(total: float, key: tuple, best_total: float, best_key: Optional[tuple]) -> bool:
    if best_key is None or total < best_total - TIE_EPS:
        return True
    return abs(total - best_total) <= TIE_EPS and key < best_key


class _Clock:
    def __init__(self, limit: float):
        self.start = time.perf_counter()
        self.limit = limit

    def elapsed(self) -> float:
        return time.perf_counter() - self.start

    def expired(self) -> bool:
        return self.elapsed() > self.limit


def _beam(model: Model, width: int, clock: _Clock):
    n = len(model.slots)
    beam = [((), model.initial_alive())]
    nodes = 0
    for d in range(n):
        children = []
        for chosen, alive in beam:
            slot_alive = alive[d]
            for c in np.flatnonzero(slot_alive):
                c = int(c)
                nxt = model.restrict(d, c, alive)
                nodes += 1
                if nxt is None:
                    continue
                ch = list(chosen) + [c]
                lb = model.bound(d + 1, ch, nxt)
                children.append((lb, model.key(ch + [0] * (n - d - 1)), tuple(ch), nxt))
        if not children:
            return None, None, nodes
        children.sort(key=lambda x: (x[0], x[1]))
        beam = [(c[2], c[3]) for c in children[:width]]
        if clock.expired():
            break
    best, best_key, best_total = None, None, float("inf")
    for chosen, alive in beam:
        if len(chosen) < n:
            continue
        total = model.bound(n, list(chosen), alive)
        key = model.key(list(chosen))
        if _better(total, key, best_total, best_key):
            best, best_key, best_total = list(chosen), key, total
    return best, best_total, nodes


def _branch_and_bound(model: Model, incumbent, inc_total, clock: _Clock):
    n = len(model.slots)
    best = incumbent
    best_total = inc_total if incumbent is not None else float("inf")
    best_key = model.key(incumbent) if incumbent is not None else None
    nodes = 0
    timed_out = False

    def dfs(depth: int, chosen: list[int], alive: list[np.ndarray]) -> None:
        nonlocal best, best_total, best_key, nodes, timed_out
        children = []
        for c in np.flatnonzero(alive[depth]):
            c = int(c)
            nodes += 1
            if nodes % 256 == 0 and clock.expired():
                timed_out = True
                return
            nxt = model.restrict(depth, c, alive)
            if nxt is None:
                continue
            chosen.append(c)
            lb = model.bound(depth + 1, chosen, nxt)
            chosen.pop()
            if lb > best_total + TIE_EPS:
                continue
            if depth + 1 == n:
                key = model.key(chosen + [c])
                if _better(lb, key, best_total, best_key):
                    best, best_total, best_key = chosen + [c], lb, key
            else:
                children.append((lb, c, nxt))
        # most promising sibling first; bounds are rechecked against the newer incumbent
        children.sort(key=lambda ch: (ch[0], ch[1]))
        for lb, c, nxt in children:
            if timed_out:
                return
            if lb > best_total + TIE_EPS:
                break
            chosen.append(c)
            dfs(depth + 1, chosen, nxt)
            chosen.pop()

    dfs(0, [], model.initial_alive())
    return best, nodes, timed_out


def _report(prob: Problem, model: Model, chosen, status: Status, nodes: int, clock: _Clock, reason=""):
    if chosen is None:
        return SolveReport(Assignment({}), None, status, nodes, clock.elapsed(), reason)
    asg = model.assignment(chosen)
    return SolveReport(asg, objectives.total(asg, prob), status, nodes, clock.elapsed(), reason)


def _trivial(prob: Problem, params: SolveParams) -> Optional[SolveReport]:
    if not prob.presolve.needs_optimization:
        asg = Assignment({})
        return SolveReport(asg, objectives.total(asg, prob), Status.OPTIMAL, 0, 0.0, "no screens left after pre-solve")
    return None


def _infeasible_reason(model: Model) -> str:
    for s in model.slots:
        if not s.cands:
            return f"screen {s.sid} has no feasible anchor for user {s.user}"
    return ""


def solve(prob: Problem, params: Optional[SolveParams] = None) -> SolveReport:
    params = params or prob.scenario.params.solver
    if params.mode is SolverMode.ORACLE:
        return oracle_solve(prob, params)
    trivial = _trivial(prob, params)
    if trivial:
        return trivial
    clock = _Clock(params.time_limit)
    model = Model(prob, params.top_k)
    reason = _infeasible_reason(model)
    if reason:
        return _report(prob, model, None, Status.INFEASIBLE, 0, clock, reason)

    inc, inc_total, nodes = _beam(model, params.beam_width, clock)
    if params.mode is SolverMode.BEAM:
        if inc is None:
            # a narrow beam can dead-end on feasible instances; fall back to full search
            inc, more, timed_out = _branch_and_bound(model, None, None, _Clock(params.time_limit))
            nodes += more
            if inc is None:
                status = Status.TIMED_OUT if timed_out else Status.INFEASIBLE
                return _report(prob, model, None, status, nodes, clock)
        return _report(prob, model, inc, Status.FEASIBLE, nodes, clock)

    best, more, timed_out = _branch_and_bound(model, inc, inc_total, clock)
    nodes += more
    log.debug("branch-and-bound explored %d nodes in %.3fs", nodes, clock.elapsed())
    if timed_out:
        return _report(prob, model, best, Status.TIMED_OUT, nodes, clock)
    if best is None:
        return _report(prob, model, None, Status.INFEASIBLE, nodes, clock, "constraints admit no layout")
    return _report(prob, model, best, Status.OPTIMAL, nodes, clock)


# --- exhaustive oracle --------------------------------------------------------


def oracle_solve(prob: Problem, params: Optional[SolveParams] = None) -> SolveReport:
    """Enumerate every feasible joint assignment; refuses instances above 10^7 combinations."""
    from .checker import pair_violation

    params = params or prob.scenario.params.solver
    trivial = _trivial(prob, params)
    if trivial:
        return trivial
    clock = _Clock(float("inf"))
    model = Model(prob, params.top_k)
    reason = _infeasible_reason(model)
    if reason:
        return _report(prob, model, None, Status.INFEASIBLE, 0, clock, reason)
    size = 1
    for s in model.slots:
        size *= len(s.cands)
    if size > ORACLE_LIMIT:
        raise OracleTooLarge(f"{size} joint assignments exceed the oracle limit of {ORACLE_LIMIT}")

    per_user = []
    for u in (0, 1):
        keys = sorted(((s.sid, s.user), s.cands) for s in model.slots if s.user == u)
        combos = []
        for choice in itertools.product(*[c for _, c in keys]):
            placed = [(k[0], cid) for (k, _), cid in zip(keys, choice)]
            if any(pair_violation(prob, u, a, b) for a, b in itertools.combinations(placed, 2)):
                continue
            part = Assignment({k: cid for (k, _), cid in zip(keys, choice)})
            combos.append(
                (
                    part,
                    objectives.user_modification(part, prob, u),
                    objectives.semantic_utility(part, prob),
                    objectives.appearance(part, prob),
                    np.array(objectives.shared_cloud(part, prob, u), dtype=float).reshape(-1, 3),
                )
            )
        if not combos:
            return _report(prob, model, None, Status.INFEASIBLE, size, clock, f"no valid layout for user {u}")
        per_user.append(combos)

    w = prob.weights
    from .geometry import hausdorff

    scored = []
    for c0, c1 in itertools.product(*per_user):
        a = hausdorff(c0[4], c1[4]) if len(c0[4]) and len(c1[4]) else 0.0
        t = w.a * a + w.m * (c0[1] + c1[1]) / 2 + w.v * (c0[2] + c1[2]) + w.p * (c0[3] + c1[3])
        pairs = {**c0[0].pairs, **c1[0].pairs}
        scored.append((t, tuple(cid for _, cid in sorted(pairs.items())), pairs))
    best_t = min(s[0] for s in scored)
    winner = min((s for s in scored if s[0] <= best_t + TIE_EPS), key=lambda s: s[1])
    asg = Assignment(winner[2])
    return SolveReport(asg, objectives.total(asg, prob), Status.OPTIMAL, len(scored), clock.elapsed())
