"""Document-level operations behind both the HTTP API and the CLI.

Every function takes and returns plain JSON-compatible data so the two front
ends stay byte-for-byte interchangeable.
"""

from __future__ import annotations

import json
import logging
from dataclasses import replace
from typing import Any, Iterable, Optional

from . import scenarios
from .checker import check
from .mapping import build_merged, merged_from_doc, merged_to_doc
from .presolver import presolve
from .problem import Problem, build_problem
from .retargeting import RetargetParams, output_to_record, pose_from_record, run_stream
from .solver import SolveReport, Status, solve
from .voxelizer import RULES, anchors_for_dims, build_grid, footprint_dims
from .workspace import Scenario, ScreenLabel, SolverMode, load_scenario, params_to_doc

log = logging.getLogger(__name__)

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE, EXIT_TIMEOUT = 0, 1, 2, 3
_EXIT = {Status.OPTIMAL: EXIT_OK, Status.FEASIBLE: EXIT_OK, Status.INFEASIBLE: EXIT_INFEASIBLE, Status.TIMED_OUT: EXIT_TIMEOUT}


def dumps(doc: Any) -> str:
    """Canonical JSON encoding used for every output document."""
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _presolve_doc(prob: Problem) -> dict:
    pre = prob.presolve
    return {
        "fixed_pairs": [{"shared": p.shared, "host": p.host, "host_user": p.host_user} for p in pre.fixed_pairs],
        "values": {k: pre.values[k] for k in sorted(pre.values)},
        "residual": [[s.id for s in pool] for pool in pre.pools],
        "residual_counts": [len(pool) for pool in pre.pools],
    }


def _placements(prob: Problem, report: SolveReport) -> list[dict]:
    out = []
    for (sid, u), cid in report.assignment.items():
        c = prob.container(u, cid)
        out.append(
            {
                "screen": sid,
                "user": u,
                "container": cid,
                "anchor": list(c.p_c),
                "center": list(prob.placed_center(prob.scenario.screen(sid), u, cid)),
            }
        )
    return out


def merge(source: Any, mode: Optional[str] = None, threads: int = 1) -> tuple[dict, int]:
    """Solve a scenario document; returns the output document and the exit code."""
    scn = load_scenario(source)
    if mode is not None:
        solver = replace(scn.params.solver, mode=SolverMode(mode))
        scn = replace(scn, params=replace(scn.params, solver=solver))
    prob = build_problem(scn, threads=threads)
    report = solve(prob)
    log.info("solve %s in %.3fs (%d nodes)", report.status.value, report.wall_time, report.nodes_explored)
    violations = check(prob, report.assignment) if report.breakdown is not None else []
    if violations:
        raise RuntimeError(f"solver produced an invalid layout: {violations}")
    doc = {
        "params": params_to_doc(scn.params),
        "presolve": _presolve_doc(prob),
        "status": report.status.value,
        "reason": report.reason,
        "nodes_explored": report.nodes_explored,
        "breakdown": report.breakdown.as_dict() if report.breakdown else None,
        "placements": _placements(prob, report) if report.breakdown else [],
    }
    if report.status in (Status.OPTIMAL, Status.FEASIBLE):
        doc.update(merged_to_doc(build_merged(prob, report)))
    return doc, _EXIT[report.status]


def validate(source: Any) -> tuple[dict, int]:
    """Voxel filtering counts, per-screen anchor counts and a pre-solve preview."""
    scn = load_scenario(source)
    p = scn.params
    pre = presolve(scn)
    users, warnings = [], []
    solvable = True
    for u, env in enumerate(scn.users):
        grid = build_grid(env, p.voxel_size, p.mu, p.sigma)
        anchors = {}
        for s in pre.pools[u]:
            n = len(anchors_for_dims(grid, footprint_dims(s, grid.size))) if grid.containers else 0
            anchors[s.id] = n
            if n == 0:
                solvable = False
                warnings.append(f"user {u}: screen {s.id} has no feasible anchor")
        if pre.pools[u] and not grid.containers:
            warnings.append(f"user {u}: no usable cells survive filtering")
        users.append(
            {
                "cells": int(grid.inside.sum()),
                "removed": {r: grid.removed.get(r, 0) for r in RULES},
                "surviving": len(grid.containers),
                "feasible_anchors": anchors,
            }
        )
    if not any(s.label is ScreenLabel.SHARED for s in scn.screens()):
        warnings.append("no Shared screens: the merged workspaces have nothing in common")
    report = {
        "users": users,
        "presolve": {
            "fixed_pairs": [{"shared": fp.shared, "host": fp.host, "host_user": fp.host_user} for fp in pre.fixed_pairs],
            "residual_counts": [len(pool) for pool in pre.pools],
        },
        "warnings": warnings,
        "solvable": solvable,
    }
    return report, EXIT_OK if solvable else EXIT_INFEASIBLE


def retarget(merged_doc: dict, records: Iterable[dict], params: Optional[dict] = None, source_user: int = 0) -> list[dict]:
    merged = merged_from_doc(merged_doc)
    rp = RetargetParams(**(params or {}))
    outputs = run_stream([pose_from_record(r) for r in records], merged, rp, source_user)
    return [output_to_record(o) for o in outputs]


def gen(combination: str, seed: int = 0) -> dict:
    return scenarios.generate(combination, seed)
