"""Seeded scenario documents for the four study desk combinations.

Combination ``"a-b"`` gives user A ``a`` physical monitors and user B ``b``.
User A works on the whiteboard, user B on the hotel list and the notes; every
app is Shared and sits on a physical monitor, and leftover monitors are
Available.
"""

from __future__ import annotations

import numpy as np

COMBINATIONS = {"1-2": (1, 2), "2-2": (2, 2), "2-3": (2, 3), "3-3": (3, 3)}
APPS = (("whiteboard",), ("list", "notes"))

HEAD = (0.0, 1.2, 0.0)
MONITOR = (0.6, 0.35, 0.03)
MONITOR_Y = 0.95
MONITOR_Z = 0.7
MONITOR_GAP = 0.05
DESK = {"min": [-1.0, 0.0, 0.3], "max": [1.0, 0.75, 1.0]}
WALL = {"min": [-2.0, 0.0, 1.1], "max": [2.0, 2.5, 1.2]}
VOLUME = {"min": [-1.2, 0.8, 0.6], "max": [1.2, 1.8, 1.0]}


def _mm(x: float) -> float:
    return round(float(x), 3)


def _user(n_monitors: int, apps: tuple[str, ...], rng: np.random.Generator) -> dict:
    pitch = MONITOR[0] + MONITOR_GAP
    screens = []
    for i in range(n_monitors):
        cx = (i - (n_monitors - 1) / 2) * pitch + rng.uniform(-0.02, 0.02)
        sid = apps[i] if i < len(apps) else None
        screens.append(
            {
                "id": sid,
                "physical": True,
                "label": "shared" if sid else "available",
                "pos": [_mm(cx - MONITOR[0] / 2), _mm(MONITOR_Y + rng.uniform(-0.01, 0.01)), MONITOR_Z],
                "dims": list(MONITOR),
            }
        )
    return {
        "head_pos": list(HEAD),
        "avatar_pos": [0.9, HEAD[1], 0.0],
        "D_u": 0.5,
        "screens": screens,
        "obstacles": [DESK, WALL],
        "usable_volumes": [VOLUME],
    }


def generate(combination: str, seed: int = 0) -> dict:
    """Scenario document for one of ``COMBINATIONS`` with study-default parameters."""
    if combination not in COMBINATIONS:
        raise ValueError(f"unknown combination {combination!r}; expected one of {sorted(COMBINATIONS)}")
    rng = np.random.default_rng(seed)
    users = []
    for u, n in enumerate(COMBINATIONS[combination]):
        user = _user(n, APPS[u], rng)
        tag = "ab"[u]
        for i, s in enumerate(user["screens"]):
            if s["id"] is None:
                s["id"] = f"{tag}_monitor{i}"
        users.append(user)
    return {
        "users": users,
        "params": {
            "weights": {"a": 0.2, "m": 0.2, "v": 0.5, "p": 0.1},
            "voxel_size": 0.1,
            "mu": 0.0,
            "sigma": 0.5235987755982988,
            "solver": {"mode": "exact", "beam_width": 8, "top_k": 50, "time_limit_s": 60.0},
        },
    }
