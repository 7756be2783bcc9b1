import itertools
import math

import numpy as np
import pytest

from deskmerge import objectives
from deskmerge.problem import Assignment
from deskmerge.scenarios import generate

from conftest import problem, random_scenario, scenario, screen, user
from test_geometry import brute_hausdorff

CELL = {"min": [0.0, 1.2, 0.7], "max": [0.1, 1.3, 0.8]}


def one_cell_problem():
    # a 0.1 screen straight ahead and a single cell whose min corner lies on the same ray
    a = user([screen("pad", (-0.05, 1.15, 0.9), (0.1, 0.1, 0.02), "available")], volumes=[CELL])
    return problem(scenario(a, user()))


def test_semantic_peak_value_is_minus_one_half():
    prob = one_cell_problem()
    (cid,) = prob.grids[0].containers
    asg = Assignment({("pad", 0): cid})
    assert prob.presolve.values["pad"] == pytest.approx(1.0)
    assert prob.container(0, cid).v_c == pytest.approx(1.0)
    assert objectives.semantic_utility(asg, prob) == pytest.approx(-0.5, abs=1e-12)


def test_empty_pool_terms_vanish():
    prob = problem(generate("3-3", 0))
    asg = Assignment({})
    assert objectives.semantic_utility(asg, prob) == 0.0
    assert objectives.appearance(asg, prob) == 0.0


def test_appearance_hand_value():
    # cell center depth 0.75 against a screen depth of 0.25: 0.5 off, N_s = N_C = 1
    a = user([screen("pad", (-0.05, 1.15, 0.25), (0.1, 0.1, 0.02), "available")], volumes=[CELL], D_u=0.2)
    prob = problem(scenario(a, user()))
    (cid,) = prob.grids[0].containers
    p = objectives.appearance(Assignment({("pad", 0): cid}), prob)
    assert p == pytest.approx(0.5 / (1 * 2 * 1), abs=1e-12)


def test_appearance_zero_at_average_depth():
    a = user([screen("pad", (-0.05, 1.15, 0.75), (0.1, 0.1, 0.02), "available")], volumes=[CELL])
    prob = problem(scenario(a, user()))
    (cid,) = prob.grids[0].containers
    assert objectives.appearance(Assignment({("pad", 0): cid}), prob) == pytest.approx(0.0, abs=1e-12)


def test_agreement_of_single_offset_points():
    # user 0 keeps a physical shared screen centered at (0,1,1); user 1 can only place it at (0.3,1,1)
    a = user([screen("doc", (-0.1, 0.9, 1.0), physical=True)])
    b = user(volumes=[{"min": [0.2, 0.9, 1.0], "max": [0.4, 1.1, 1.1]}])
    prob = problem(scenario(a, b))
    (slot,) = [(s.id, u) for u in (0, 1) for s in prob.presolve.pools[u]]
    assert slot == ("doc", 1)
    anchor = min(prob.grids[1].containers)
    asg = Assignment({slot: anchor})
    assert prob.view(asg, 1)["doc"] == pytest.approx((0.3, 1.0, 1.0))
    assert objectives.agreement(asg, prob) == pytest.approx(0.3, abs=1e-12)


def test_identical_layouts_agree():
    prob = problem(generate("3-3", 0))
    assert objectives.agreement(Assignment({}), prob) > 0  # hosted screens sit on different monitors
    a = user([screen("doc", (-0.3, 1.0, 0.7))])
    prob = problem(scenario(a, user([screen("doc2", (-0.3, 1.0, 0.7), label="private")])))
    assert objectives.agreement(Assignment({}), prob) == 0.0  # user 1 has no copy placed yet


def test_nothing_moved_means_no_modification():
    prob = problem(generate("3-3", 2))
    assert objectives.modification(Assignment({}), prob) == 0.0


def test_single_moved_screen_is_halved():
    a = user([screen("pad", (0.0, 1.2, 0.8), (0.1, 0.1, 0.02), "available")], volumes=[{"min": [0.2, 1.2, 0.8], "max": [0.3, 1.3, 0.9]}])
    prob = problem(scenario(a, user()))
    (cid,) = prob.grids[0].containers
    assert objectives.modification(Assignment({("pad", 0): cid}), prob) == pytest.approx(0.1, abs=1e-12)


def test_total_weighted_sum():
    prob = one_cell_problem()
    (cid,) = prob.grids[0].containers
    b = objectives.total(Assignment({("pad", 0): cid}), prob)
    w = prob.weights
    assert b.total == pytest.approx(w.a * b.A + w.m * b.M + w.v * b.V + w.p * b.P, abs=1e-15)


def _independent_terms(prob, asg):
    """Recompute every objective from scenario data without the module's helpers."""
    scn = prob.scenario
    pre = prob.presolve
    hosts = {p.shared: p for p in pre.fixed_pairs}
    pos = {}
    for u in (0, 1):
        for s in scn.screens():
            if s.label.value == "private":
                continue
            if (s.id, u) in asg.pairs:
                c = prob.grids[u].containers[asg.pairs[(s.id, u)]]
                pos[(s.id, u)] = np.array([c.p_c.x + s.width / 2, c.p_c.y + s.height / 2, c.p_c.z])
            elif s.owner == u:
                pos[(s.id, u)] = np.array(s.center)
            elif s.id in hosts:
                pos[(s.id, u)] = np.array(scn.screen(hosts[s.id].host).center)
    shared = sorted(s.id for s in scn.screens() if s.label.value == "shared")
    clouds = [[pos[(sid, u)] for sid in shared if (sid, u) in pos] for u in (0, 1)]
    A = brute_hausdorff(*clouds) if clouds[0] and clouds[1] else 0.0
    M = 0.0
    for u in (0, 1):
        own = [s for s in scn.users[u].screens if s.label.value != "private"]
        if own:
            M += brute_hausdorff([np.array(s.center) for s in own], [pos[(s.id, u)] for s in own]) / 2
    n_s = len({sid for sid, _ in asg.pairs})
    V = P = 0.0
    for (sid, u), cid in asg.pairs.items():
        env = scn.users[u]
        c = prob.grids[u].containers[cid]
        norm = n_s * 2 * len(prob.grids[u].containers)
        V -= pre.values[sid] * c.v_c / norm
        depths = [s.center.z - env.head_pos.z for s in env.screens]
        z_avg = sum(depths) / len(depths) if depths else 0.0  # no own screens: reference depth 0
        P += abs(z_avg - (c.p_c.z + prob.grids[u].size / 2 - env.head_pos.z)) / norm
    return A, M, V, P


@pytest.mark.parametrize("seed", range(25))
def test_terms_match_direct_recomputation(seed):
    prob = problem(random_scenario(seed))
    rng = np.random.default_rng(seed)
    pairs = {}
    for u in (0, 1):
        ids = sorted(prob.grids[u].containers)
        for s in prob.presolve.pools[u]:
            if not ids:
                pytest.skip("user has no capacity")
            pairs[(s.id, u)] = int(rng.choice(ids))
    asg = Assignment(pairs)
    b = objectives.total(asg, prob)
    A, M, V, P = _independent_terms(prob, asg)
    assert (b.A, b.M, b.V, b.P) == pytest.approx((A, M, V, P), abs=1e-12)
