import math

import numpy as np
import pytest

from deskmerge.problem import build_problem
from deskmerge.workspace import load_scenario


def screen(sid, pos, dims=(0.2, 0.2, 0.02), label="shared", physical=False):
    return {"id": sid, "physical": physical, "label": label, "pos": list(pos), "dims": list(dims)}


def user(screens=(), volumes=None, obstacles=(), head=(0.0, 1.2, 0.0), avatar=(0.9, 1.2, 0.0), D_u=0.5):
    if volumes is None:
        volumes = [{"min": [-0.5, 1.0, 0.6], "max": [0.5, 1.5, 0.7]}]
    return {
        "head_pos": list(head),
        "avatar_pos": list(avatar),
        "D_u": D_u,
        "screens": list(screens),
        "obstacles": list(obstacles),
        "usable_volumes": list(volumes),
    }


def scenario(u0, u1, **params):
    doc = {"users": [u0, u1]}
    if params:
        doc["params"] = params
    return doc


def problem(doc):
    return build_problem(load_scenario(doc))


def _rand_dims(rng, d):
    return [round(d * rng.integers(1, 4) - 0.01, 3), round(d * rng.integers(1, 3) - 0.01, 3), 0.02]


def random_scenario(seed, max_cells=(30, 15, 3), max_pool=4, solver=None):
    """Random two-user scenario whose residual pools hold 1..max_pool screens each."""
    rng = np.random.default_rng(seed)
    d = 0.1
    n_shared = [int(rng.integers(0, 3)), int(rng.integers(0, 3))]
    users = []
    for u in (0, 1):
        nx = int(rng.integers(4, max_cells[0] + 1))
        ny = int(rng.integers(3, max_cells[1] + 1))
        nz = int(rng.integers(1, max_cells[2] + 1))
        x0 = -round(nx * d / 2, 1)
        vmin = [x0, 0.8, 0.6]
        vmax = [round(x0 + nx * d, 3), round(0.8 + ny * d, 3), round(0.6 + nz * d, 3)]
        screens = []
        for i in range(n_shared[u]):
            pos = [round(float(rng.uniform(-0.6, 0.4)), 3), round(float(rng.uniform(0.9, 1.4)), 3), 0.5]
            screens.append(screen(f"s{u}{i}", pos, _rand_dims(rng, d), "shared"))
        budget = max_pool - n_shared[u] - n_shared[1 - u]
        n_avail = int(rng.integers(1 if n_shared[u] + n_shared[1 - u] == 0 else 0, max(budget, 0) + 1))
        for i in range(n_avail):
            pos = [round(float(rng.uniform(-0.6, 0.4)), 3), round(float(rng.uniform(0.9, 1.4)), 3), 0.5]
            screens.append(screen(f"v{u}{i}", pos, _rand_dims(rng, d), "available"))
        if rng.random() < 0.5:
            # a physical private monitor inside the volume shadows cells
            px = round(float(rng.uniform(vmin[0], vmax[0] - 0.3)), 3)
            screens.append(screen(f"p{u}", [px, 0.9, 0.55], (0.3, 0.2, 0.02), "private", physical=True))
        obstacles = []
        if rng.random() < 0.5:
            ox = float(rng.uniform(vmin[0], vmax[0]))
            obstacles.append({"min": [ox, 0.8, 0.6], "max": [ox + 0.15, 1.0, 0.75]})
        users.append(user(screens, [{"min": vmin, "max": vmax}], obstacles))
    # pools hold own movable plus remote shared; trim to the budget
    for u in (0, 1):
        pool = [s for s in users[u]["screens"] if s["label"] != "private"]
        pool += [s for s in users[1 - u]["screens"] if s["label"] == "shared"]
        while len(pool) > max_pool:
            victim = next(s for s in users[u]["screens"] if s["label"] == "available")
            users[u]["screens"].remove(victim)
            pool.remove(victim)
    params = {"solver": solver} if solver else {}
    return scenario(users[0], users[1], **params)


@pytest.fixture
def fig4_doc():
    from deskmerge.scenarios import generate

    return generate("1-2", 1)


SIGMA = math.pi / 6


def small_instance(seed, solver=None):
    """At most 3 residual screens and at most 15 cells per user, for exhaustive cross-checks."""
    rng = np.random.default_rng(10_000 + seed)
    users = []
    n_res = int(rng.integers(1, 4))
    owners = rng.integers(0, 2, size=n_res)
    labels = rng.choice(["shared", "available"], size=n_res)
    for u in (0, 1):
        nz = int(rng.integers(1, 3))
        nx = int(rng.integers(2, 6))
        ny = int(rng.integers(1, max(2, 15 // (nx * nz)) + 1))
        while nx * ny * nz > 15:
            ny -= 1
        x0 = round(-0.1 * int(rng.integers(0, nx + 1)), 1)
        vol = {"min": [x0, 1.0, 0.7], "max": [round(x0 + 0.1 * nx, 1), round(1.0 + 0.1 * ny, 1), round(0.7 + 0.1 * nz, 1)]}
        screens = []
        for i, (o, lab) in enumerate(zip(owners, labels)):
            if o != u:
                continue
            w = 0.1 * int(rng.integers(1, 3)) - 0.01
            pos = [round(float(rng.uniform(-0.4, 0.3)), 3), round(float(rng.uniform(1.0, 1.3)), 3), 0.6]
            screens.append(screen(f"r{i}", pos, (round(w, 2), 0.09, 0.02), str(lab)))
        users.append(user(screens, [vol]))
    params = {"solver": solver} if solver else {}
    return scenario(users[0], users[1], **params)


# --- retargeting fixtures -----------------------------------------------------

HEAD = (0.0, 1.2, 0.0)
DOWN = (0.0, -1.0, 0.2)  # resting gaze toward the desk, away from every target


def merged_pair(avatar_x=(0.9, 0.9)):
    """Two links: 'doc' ahead (shifted 0.3 m right for user 1) and 'sheet' to the left."""
    from deskmerge.geometry import Vec3
    from deskmerge.mapping import MergedWorkspace, ScreenLink
    from deskmerge.workspace import Side

    links = (
        ScreenLink("doc", 0, Vec3(0.0, 1.2, 1.0), Vec3(0.3, 1.2, 1.0), Vec3(0.4, 0.3, 0.02)),
        ScreenLink("sheet", 1, Vec3(-0.6, 1.2, 1.0), Vec3(-0.4, 1.3, 1.0), Vec3(0.4, 0.3, 0.02)),
    )
    sides = tuple(Side.RIGHT if x > 0 else Side.LEFT for x in avatar_x)
    return MergedWorkspace(
        links=links,
        private_screens=((), ()),
        layouts=((), ()),
        avatar_sides=sides,
        heads=(Vec3(*HEAD), Vec3(*HEAD)),
        avatars=tuple(Vec3(x, 1.2, 0.0) for x in avatar_x),
    )


def pointing_at(t, point, head=HEAD, gaze=DOWN):
    """Pose whose head->hand ray passes through ``point``."""
    from deskmerge.geometry import Vec3
    from deskmerge.retargeting import PoseSample

    h = Vec3(*head)
    hand = h + (Vec3(*point) - h).unit().scale(0.5)
    return PoseSample(t, h, Vec3(*gaze), hand)


def resting(t, head=HEAD, gaze=DOWN):
    from deskmerge.geometry import Vec3
    from deskmerge.retargeting import PoseSample

    h = Vec3(*head)
    return PoseSample(t, h, Vec3(*gaze), h + (0.25, -0.4, 0.1))


def script(hz, segments):
    """Samples at ``hz`` over consecutive (duration, factory) segments; factory(t) -> PoseSample."""
    out, t0 = [], 0.0
    n = 0
    for duration, make in segments:
        end = t0 + duration
        while n / hz < end - 1e-12:
            out.append(make(n / hz))
            n += 1
        t0 = end
    return out


# --- acceptance reporting -----------------------------------------------------

_CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record the outcome of one acceptance criterion for the end-of-run summary."""

    def record(number: int, passed: bool, detail: str) -> bool:
        _CRITERIA[number] = (bool(passed), detail)
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        passed, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
