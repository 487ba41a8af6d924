import json
import math

import numpy as np
import pytest

from ftcsurf.cli import boundary_loops, build_mesh, main, parse_grid
from ftcsurf.interpolate import identity_problem
from ftcsurf.weierstrass import catenoid, enneper


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr().out


def test_invariants_catenoid(capsys):
    code, out = run(["invariants", "catenoid", "--json"], capsys)
    assert code == 0
    inv = json.loads(out)["invariants"]
    assert inv["degN"] == 1 and inv["hittingBound"] == 6
    assert inv["totalCurvature"] == pytest.approx(-4 * math.pi)


def test_invariants_enneper(capsys):
    code, out = run(["--json", "invariants", "enneper"], capsys)
    inv = json.loads(out)["invariants"]
    assert code == 0 and inv["degN"] == 1 and inv["eulerChar"] == 1 and inv["hittingBound"] == 7


def test_catenoid_annulus_mesh(tmp_path, capsys):
    out = tmp_path / "c.obj"
    code, _ = run(["export-mesh", "catenoid", "--grid", f"annulus:{1 / 3!r},3,6,24",
                   "--out", str(out)], capsys)
    assert code == 0
    v = np.array([ln.split()[1:] for ln in out.read_text().splitlines() if ln.startswith("v ")],
                 float)
    for ring, h in ((v[:24], -math.log(3)), (v[-24:], math.log(3))):
        np.testing.assert_allclose(ring[:, 2], h, atol=1e-12)
        np.testing.assert_allclose(np.hypot(ring[:, 0], ring[:, 1]), 5 / 3, atol=1e-12)
    _, _, tris = build_mesh(catenoid(), parse_grid("annulus:0.5,2,6,24"))
    assert boundary_loops(tris) == 2


def test_enneper_disk_one_boundary_loop():
    _, X, tris = build_mesh(enneper(), parse_grid("disk:1.5,8,32"))
    assert np.all(np.isfinite(X))
    assert boundary_loops(tris) == 1


def test_mesh_errors(capsys):
    assert main(["export-mesh", "catenoid", "--grid", "annulus:1,2,0,16"]) == 2
    assert main(["export-mesh", "catenoid", "--grid", "rect:0,1,0,1,0,3"]) == 2
    assert main(["export-mesh", "catenoid", "--grid", "bogus:1"]) == 2
    # the end at 0 sits inside the disk
    assert main(["export-mesh", "catenoid", "--grid", "disk:1,4,8"]) == 3


def test_hitset(capsys):
    code, out = run(["hitset", "--r", "1", "--m", "1"], capsys)
    lines = out.splitlines()
    assert code == 0 and lines[0] == "15" and len(lines) == 17
    code, out = run(["hitset", "--r", "1", "--m", "1", "--spatial", "--json", "--reflections"],
                    capsys)
    d = json.loads(out)
    assert code == 0 and len(d["points"]) == 16 and "reflection_group" in d
    assert main(["hitset", "--r", "0", "--m", "1"]) == 2


def test_hitcount(capsys):
    code, out = run(["hitcount", "catenoid", "--line", "0,0,0:1,0,0", "--json"], capsys)
    r = json.loads(out)["reports"]
    assert code == 0 and (r["count"], r["bound"], r["status"]) == (2, 6, "within_bound")
    assert main(["hitcount", "catenoid", "--line", "0,0,0"]) == 2


def test_curve(capsys):
    code, out = run(["curve", "fig21", "--point", "0,0"], capsys)
    assert code == 0 and "w=2" in out and "t=1" in out and "pass" in out
    code, out = run(["curve", "random", "--count", "5", "--seed", "3"], capsys)
    rows = out.splitlines()
    assert code == 0 and rows[0] == "id,w,t,pass" and len(rows) == 6
    assert main(["curve", "no_such_curve"]) == 2


def test_malformed_json(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["invariants", str(bad)]) == 2
    assert main(["interpolate", str(bad)]) == 2
    assert main(["invariants", "no_such_surface"]) == 2


def test_deterministic_output(capsys):
    argv = ["hitcount", "enneper", "--random", "3", "--seed", "11"]
    assert run(argv, capsys)[1] == run(argv, capsys)[1]
    argv = ["catalog", "--json"]
    a, b = run(argv, capsys)[1], run(argv, capsys)[1]
    assert a == b and "provenance" in json.loads(a)


def test_surface_round_trip(tmp_path, capsys):
    path = tmp_path / "cat.json"
    assert main(["catalog", "catenoid", "--out", str(path)]) == 0
    _, a = run(["invariants", str(path), "--json"], capsys)
    _, b = run(["invariants", "catenoid", "--json"], capsys)
    assert json.loads(a)["invariants"] == json.loads(b)["invariants"]


def test_interpolate_command(tmp_path, capsys):
    prob = identity_problem(catenoid(), [2.0, 1.5j])
    prob.targets = prob.targets + np.array([[0.05, 0, 0], [0, -0.05, 0.02]])
    pin = tmp_path / "prob.json"
    pin.write_text(json.dumps(prob.to_json()))
    sol = tmp_path / "sol.json"
    assert main(["interpolate", str(pin), "--out", str(sol)]) == 0
    d = json.loads(sol.read_text())
    assert d["report"]["interpolation_error"] < 1e-6
    # the solved surface re-imports
    surf = tmp_path / "surf.json"
    surf.write_text(json.dumps(d["surface"]))
    assert main(["invariants", str(surf)]) == 0


def test_catalog_env_override(tmp_path, monkeypatch, capsys):
    cat = {"surfaces": {"only_cat": {"surface": catenoid().to_json(), "provenance": "test"}}}
    path = tmp_path / "cat.json"
    path.write_text(json.dumps(cat))
    monkeypatch.setenv("FTC_CATALOG_PATH", str(path))
    code, out = run(["catalog"], capsys)
    assert code == 0 and out.startswith("only_cat")
