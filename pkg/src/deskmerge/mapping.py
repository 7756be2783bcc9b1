"""Cross-user screen correspondence of a solved merge."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .geometry import Vec3
from .problem import Problem
from .solver import SolveReport, Status
from .workspace import ScreenLabel, Side


class MappingError(RuntimeError):
    pass


@dataclass(frozen=True)
class ScreenLink:
    screen_id: str
    owner: int
    pos_user0: Vec3  # screen center in user 0's merged view
    pos_user1: Vec3
    dims: Vec3
    hosted_on: Optional[str] = None

    def pos(self, user: int) -> Vec3:
        return self.pos_user0 if user == 0 else self.pos_user1


@dataclass(frozen=True)
class PlacedScreen:
    screen_id: str
    center: Vec3
    dims: Vec3


@dataclass(frozen=True)
class MergedWorkspace:
    links: tuple[ScreenLink, ...]
    private_screens: tuple[tuple[PlacedScreen, ...], tuple[PlacedScreen, ...]]
    layouts: tuple[tuple[PlacedScreen, ...], tuple[PlacedScreen, ...]]
    avatar_sides: tuple[Side, Side]
    heads: tuple[Vec3, Vec3]
    avatars: tuple[Vec3, Vec3]

    @property
    def mirror_streaming(self) -> bool:
        return self.avatar_sides[0] == self.avatar_sides[1]

    def link(self, screen_id: str) -> ScreenLink:
        for ln in self.links:
            if ln.screen_id == screen_id:
                return ln
        raise MappingError(f"no link for screen {screen_id!r}")


def build_merged(prob: Problem, report: SolveReport) -> MergedWorkspace:
    if report.status not in (Status.OPTIMAL, Status.FEASIBLE):
        raise MappingError(f"cannot map an unsolved merge (status {report.status.value})")
    scn = prob.scenario
    views = [prob.view(report.assignment, u) for u in (0, 1)]
    hosts = {p.shared: p.host for p in prob.presolve.fixed_pairs}

    links = []
    for sid in prob.shared_ids():
        s = scn.screen(sid)
        if sid not in views[0] or sid not in views[1]:
            raise MappingError(f"shared screen {sid!r} lacks a placement in one of the views")
        links.append(ScreenLink(sid, s.owner, views[0][sid], views[1][sid], s.dims, hosts.get(sid)))

    private, layouts = [], []
    for u, env in enumerate(scn.users):
        private.append(tuple(PlacedScreen(s.id, s.center, s.dims) for s in env.screens if s.label is ScreenLabel.PRIVATE))
        placed = []
        for sid in sorted(views[u]):
            s = scn.screen(sid)
            if s.label is ScreenLabel.PRIVATE:
                continue
            placed.append(PlacedScreen(sid, views[u][sid], s.dims))
        layouts.append(tuple(placed))
    return MergedWorkspace(
        links=tuple(links),
        private_screens=(private[0], private[1]),
        layouts=(layouts[0], layouts[1]),
        avatar_sides=(scn.users[0].avatar_side, scn.users[1].avatar_side),
        heads=(scn.users[0].head_pos, scn.users[1].head_pos),
        avatars=(scn.users[0].avatar_pos, scn.users[1].avatar_pos),
    )


def _placed_doc(p: PlacedScreen) -> dict:
    return {"id": p.screen_id, "center": list(p.center), "dims": list(p.dims)}


def merged_to_doc(m: MergedWorkspace) -> dict:
    return {
        "links": [
            {
                "id": ln.screen_id,
                "owner": ln.owner,
                "pos_user0": list(ln.pos_user0),
                "pos_user1": list(ln.pos_user1),
                "dims": list(ln.dims),
                "hosted_on": ln.hosted_on,
            }
            for ln in m.links
        ],
        "private_screens": [[_placed_doc(p) for p in ps] for ps in m.private_screens],
        "layouts": [[_placed_doc(p) for p in ps] for ps in m.layouts],
        "avatar_sides": [s.value for s in m.avatar_sides],
        "mirror_streaming": m.mirror_streaming,
        "heads": [list(h) for h in m.heads],
        "avatars": [list(a) for a in m.avatars],
    }


def _placed(d: dict) -> PlacedScreen:
    return PlacedScreen(d["id"], Vec3.of(d["center"]), Vec3.of(d["dims"]))


def merged_from_doc(doc: dict) -> MergedWorkspace:
    """Rebuild a merged workspace from a ``merge`` output (or its ``merged`` section)."""
    doc = doc.get("merged", doc)
    try:
        links = tuple(
            ScreenLink(
                d["id"], int(d["owner"]), Vec3.of(d["pos_user0"]), Vec3.of(d["pos_user1"]), Vec3.of(d["dims"]), d.get("hosted_on")
            )
            for d in doc["links"]
        )
        return MergedWorkspace(
            links=links,
            private_screens=tuple(tuple(_placed(p) for p in ps) for ps in doc.get("private_screens", [[], []])),
            layouts=tuple(tuple(_placed(p) for p in ps) for ps in doc.get("layouts", [[], []])),
            avatar_sides=tuple(Side(s) for s in doc["avatar_sides"]),
            heads=tuple(Vec3.of(h) for h in doc["heads"]),
            avatars=tuple(Vec3.of(a) for a in doc["avatars"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise MappingError(f"malformed merged workspace document: {exc}") from None
