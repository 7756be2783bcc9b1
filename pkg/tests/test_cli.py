import json

import pytest
from fastapi.testclient import TestClient

from deskmerge import cli, service
from deskmerge.api import app
from deskmerge.retargeting import pose_to_record
from deskmerge.scenarios import generate

from conftest import pointing_at, resting, scenario, screen, script, user


@pytest.fixture
def study_file(tmp_path):
    path = tmp_path / "s22.json"
    path.write_text(service.dumps(generate("2-2", 3)))
    return path


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


class TestGen:
    def test_same_seed_same_bytes(self, capsys):
        a = run(["gen", "1-2", "--seed", 7], capsys)[1]
        b = run(["gen", "1-2", "--seed", 7], capsys)[1]
        assert a == b and a.endswith("\n")

    @pytest.mark.parametrize("combo,counts", [("1-2", [1, 2]), ("3-3", [3, 3]), ("2-3", [2, 3])])
    def test_monitor_counts(self, combo, counts, capsys):
        doc = json.loads(run(["gen", combo], capsys)[1])
        assert [len(u["screens"]) for u in doc["users"]] == counts
        assert all(s["physical"] for u in doc["users"] for s in u["screens"])

    def test_unknown_combination(self, capsys):
        code, _, err = run(["gen", "4-4"], capsys)
        assert code == 1 and "unknown combination" in err


class TestMerge:
    def test_study_fixture_has_three_links(self, study_file, tmp_path, capsys):
        out = tmp_path / "m.json"
        code, _, _ = run(["merge", "--scenario", study_file, "--out", out], capsys)
        doc = json.loads(out.read_text())
        assert code == 0
        assert doc["status"] == "optimal"
        assert len(doc["links"]) == 3

    def test_malformed_file(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{")
        code, _, err = run(["merge", "--scenario", bad], capsys)
        assert code == 1 and "malformed" in err

    def test_missing_file(self, tmp_path, capsys):
        code, _, err = run(["merge", "--scenario", tmp_path / "nope.json"], capsys)
        assert code == 1 and "cannot read" in err

    def test_schema_error_names_the_field(self, tmp_path, capsys):
        doc = generate("1-2", 0)
        doc["users"][0]["D_u"] = -1
        path = tmp_path / "neg.json"
        path.write_text(json.dumps(doc))
        code, _, err = run(["merge", "--scenario", path], capsys)
        assert code == 1 and "users[0].D_u" in err

    def test_over_constrained(self, tmp_path, capsys):
        big = screen("wall", (-1.0, 0.8, 1.0), (2.0, 1.0, 0.02), "shared")
        path = tmp_path / "big.json"
        path.write_text(json.dumps(scenario(user([big]), user())))
        code, out, err = run(["merge", "--scenario", path], capsys)
        assert code == 2
        assert json.loads(out)["status"] == "infeasible"
        assert "wall" in err

    def test_reruns_are_byte_identical(self, study_file, tmp_path, capsys):
        outs = []
        for i in range(2):
            out = tmp_path / f"m{i}.json"
            run(["merge", "--scenario", study_file, "--out", out, "--threads", 2], capsys)
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_mode_override(self, study_file, capsys):
        code, out, _ = run(["merge", "--scenario", study_file, "--mode", "beam"], capsys)
        assert code == 0 and json.loads(out)["status"] == "feasible"


class TestValidate:
    def test_rule_counts_table(self, study_file, capsys):
        code, out, _ = run(["validate", "--scenario", study_file], capsys)
        assert code == 0
        header = out.splitlines()[0].split()
        assert header == ["user", "cells", "obstacle", "screen", "proximity", "surviving"]
        report = json.loads(run(["validate", "--scenario", study_file, "--json"], capsys)[1])
        for r in report["users"]:
            assert r["cells"] - sum(r["removed"].values()) == r["surviving"]

    def test_huge_personal_space_empties_the_grid(self, tmp_path, capsys):
        doc = generate("1-2", 0)
        for u in doc["users"]:
            u["D_u"] = 5.0
        path = tmp_path / "far.json"
        path.write_text(json.dumps(doc))
        code, out, _ = run(["validate", "--scenario", path, "--json"], capsys)
        report = json.loads(out)
        assert code == 2
        for r in report["users"]:
            assert r["surviving"] == 0
            assert r["removed"]["proximity"] == r["cells"] - r["removed"]["obstacle"] - r["removed"]["screen"]

    def test_private_only_warns(self, tmp_path, capsys):
        path = tmp_path / "priv.json"
        path.write_text(json.dumps(scenario(user([screen("p", (0, 1, 0.8), label="private")]), user())))
        code, out, _ = run(["validate", "--scenario", path], capsys)
        assert "warning: no Shared screens" in out


class TestRetarget:
    def test_stream_round_trip(self, study_file, tmp_path, capsys):
        merged = tmp_path / "m.json"
        run(["merge", "--scenario", study_file, "--out", merged], capsys)
        doc = json.loads(merged.read_text())
        wb = next(ln for ln in doc["links"] if ln["id"] == "whiteboard")
        samples = script(60, [(0.3, resting), (1.2, lambda t: pointing_at(t, wb["pos_user0"])), (1.0, resting)])
        stream = tmp_path / "s.jsonl"
        stream.write_text("".join(json.dumps(pose_to_record(p)) + "\n" for p in samples))
        outs = []
        for i in range(2):
            out = tmp_path / f"o{i}.jsonl"
            code, _, _ = run(["retarget", "--merged", merged, "--stream", stream, "--out", out], capsys)
            assert code == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]
        records = [json.loads(line) for line in outs[0].decode().splitlines()]
        assert len(records) == len(samples)
        assert "whiteboard" in {r["highlighted_link"] for r in records}

    def test_unordered_stream(self, study_file, tmp_path, capsys):
        merged = tmp_path / "m.json"
        run(["merge", "--scenario", study_file, "--out", merged], capsys)
        stream = tmp_path / "s.jsonl"
        stream.write_text(json.dumps(pose_to_record(resting(0.5))) + "\n" + json.dumps(pose_to_record(resting(0.1))) + "\n")
        code, _, err = run(["retarget", "--merged", merged, "--stream", stream], capsys)
        assert code == 1 and "backwards" in err


class TestHttp:
    client = TestClient(app)

    def test_health(self):
        assert self.client.get("/health").json() == {"status": "ok"}

    def test_gen_matches_local(self):
        body = self.client.post("/gen", json={"combination": "2-3", "seed": 9}).json()
        assert service.dumps(body) == service.dumps(generate("2-3", 9))

    def test_merge_matches_local(self):
        doc = generate("1-2", 3)
        resp = self.client.post("/merge", json={"scenario": doc}).json()
        local, code = service.merge(doc)
        assert resp["exit_code"] == code == 0
        assert service.dumps(resp["document"]) == service.dumps(local)

    def test_bad_scenario_is_422(self):
        doc = generate("1-2", 3)
        doc["users"][0]["screens"].append(dict(doc["users"][0]["screens"][0]))
        resp = self.client.post("/merge", json={"scenario": doc})
        assert resp.status_code == 422
        assert "duplicate" in resp.json()["detail"]["message"]

    def test_cli_through_server(self, study_file, monkeypatch, capsys):
        monkeypatch.setattr(cli, "HttpClient", _TestHttpClient)
        local = run(["merge", "--scenario", study_file], capsys)
        remote = run(["--server", "http://testserver", "merge", "--scenario", study_file], capsys)
        assert local[:2] == remote[:2]
        v_local = run(["validate", "--scenario", study_file], capsys)
        v_remote = run(["--server", "http://testserver", "validate", "--scenario", study_file], capsys)
        assert v_local == v_remote


class _TestHttpClient(cli.HttpClient):
    def __init__(self, base_url, timeout=600.0):
        self.http = TestClient(app)
