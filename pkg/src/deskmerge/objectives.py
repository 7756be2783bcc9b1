"""The four layout objectives and their weighted sum.

Point clouds hold screen centers, each expressed in its own user's frame.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .geometry import hausdorff
from .problem import Assignment, Problem


@dataclass(frozen=True)
class ObjectiveBreakdown:
    A: float
    M: float
    V: float
    P: float
    total: float

    def as_dict(self) -> dict:
        return asdict(self)


def shared_cloud(asg: Assignment, prob: Problem, user: int) -> list:
    """Shared-screen centers in ``user``'s merged view, ordered by screen id."""
    view = prob.view(asg, user)
    return [view[sid] for sid in prob.shared_ids() if sid in view]


def agreement(asg: Assignment, prob: Problem) -> float:
    """Hausdorff distance between the Shared-screen clouds of the two merged views."""
    x, y = shared_cloud(asg, prob, 0), shared_cloud(asg, prob, 1)
    if not x or not y:
        return 0.0
    return hausdorff(x, y)


def user_modification(asg: Assignment, prob: Problem, user: int) -> float:
    ids = prob.own_ids(user)
    if not ids:
        return 0.0
    before = {s.id: s.center for s in prob.scenario.users[user].screens}
    after = prob.view(asg, user)
    return hausdorff([before[i] for i in ids], [after[i] for i in ids])


def modification(asg: Assignment, prob: Problem) -> float:
    """Half the summed per-user Hausdorff distance between own screens before and after."""
    return (user_modification(asg, prob, 0) + user_modification(asg, prob, 1)) / 2


def _normalizer(prob: Problem, user: int) -> float:
    n_s = len(prob.presolve.residual_screens)
    return n_s * 2 * len(prob.grids[user].containers)


def semantic_utility(asg: Assignment, prob: Problem) -> float:
    """Negated, normalized sum of screen value times container utility."""
    acc = 0.0
    values = prob.presolve.values
    for (sid, u), cid in asg.items():
        acc += values[sid] * prob.container(u, cid).v_c / _normalizer(prob, u)
    return -acc if acc else 0.0


def appearance(asg: Assignment, prob: Problem) -> float:
    acc = 0.0
    for (sid, u), cid in asg.items():
        z_avg = prob.scenario.users[u].z_avg
        acc += abs(z_avg - prob.container(u, cid).z_c) / _normalizer(prob, u)
    return acc


def total(asg: Assignment, prob: Problem) -> ObjectiveBreakdown:
    w = prob.weights
    a, m, v, p = agreement(asg, prob), modification(asg, prob), semantic_utility(asg, prob), appearance(asg, prob)
    return ObjectiveBreakdown(a, m, v, p, w.a * a + w.m * m + w.v * v + w.p * p)
