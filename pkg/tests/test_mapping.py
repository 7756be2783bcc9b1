import pytest

from deskmerge.mapping import MappingError, build_merged, merged_from_doc, merged_to_doc
from deskmerge.scenarios import generate
from deskmerge.solver import solve

from conftest import problem, scenario, screen, user

MONITOR = (0.6, 0.35, 0.03)


def merged(doc):
    prob = problem(doc)
    return build_merged(prob, solve(prob)), prob


def test_study_avatars_mirror():
    m, _ = merged(generate("2-2", 0))
    assert m.mirror_streaming


def test_opposite_avatars_do_not_mirror():
    doc = generate("2-2", 0)
    doc["users"][1]["avatar_pos"] = [-0.9, 1.2, 0.0]
    m, _ = merged(doc)
    assert [s.value for s in m.avatar_sides] == ["right", "left"]
    assert not m.mirror_streaming


def test_presolved_pair_is_hosted():
    a = user([screen("doc", (-0.3, 1.0, 0.8), (0.6, 0.35, 0.02))])
    b = user([screen("mon", (-0.3, 1.0, 0.7), MONITOR, "available", physical=True)])
    m, prob = merged(scenario(a, b))
    (ln,) = m.links
    assert ln.hosted_on == "mon"
    assert ln.pos_user1 == prob.scenario.screen("mon").center
    assert ln.pos_user0 == prob.scenario.screen("doc").center


def test_three_links_for_every_study_combination():
    for combo in ("1-2", "2-2", "2-3", "3-3"):
        m, _ = merged(generate(combo, 1))
        assert sorted(ln.screen_id for ln in m.links) == ["list", "notes", "whiteboard"]


def test_private_screens_stay_local():
    a = user([screen("secret", (0.3, 1.0, 0.8), label="private", physical=True), screen("doc", (-0.3, 1.0, 0.8))])
    m, _ = merged(scenario(a, user()))
    assert [p.screen_id for p in m.private_screens[0]] == ["secret"]
    assert m.private_screens[1] == ()
    assert "secret" not in {p.screen_id for p in m.layouts[1]}
    assert "secret" not in {ln.screen_id for ln in m.links}


def test_layouts_match_placements():
    m, prob = merged(generate("1-2", 2))
    report = solve(prob)
    view = prob.view(report.assignment, 1)
    assert {p.screen_id: p.center for p in m.layouts[1]} == view


def test_document_round_trip():
    m, _ = merged(generate("2-3", 6))
    assert merged_from_doc(merged_to_doc(m)) == m
    assert merged_from_doc({"merged": merged_to_doc(m)}) == m


def test_missing_link_is_an_error():
    m, _ = merged(generate("2-3", 6))
    with pytest.raises(MappingError):
        m.link("nope")


def test_malformed_document():
    with pytest.raises(MappingError):
        merged_from_doc({"links": [{"id": "x"}]})


def test_unsolved_merge_cannot_be_mapped():
    big = screen("wall", (-1.0, 0.8, 1.0), (2.0, 1.0, 0.02), "shared")
    prob = problem(scenario(user([big]), user()))
    with pytest.raises(MappingError):
        build_merged(prob, solve(prob))
