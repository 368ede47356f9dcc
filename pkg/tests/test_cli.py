import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from isozmc import cli


def run(tmp_path, *args):
    return cli.main([*args])


def test_generate_counts(tmp_path):
    out = tmp_path / "cat.obj"
    rc = cli.main(["generate", "--family", "catenoid", "--u-range", "-1:1", "--v-range", f"0:{2 * math.pi}",
                   "--nu", "65", "--nv", "129", "--out", str(out)])
    assert rc == 0
    lines = out.read_bytes().split(b"\n")
    assert sum(l.startswith(b"v ") for l in lines) == 65 * 129
    assert sum(l.startswith(b"f ") for l in lines) == 2 * 64 * 128
    assert b"\r" not in out.read_bytes()
    verts = np.array([[float(x) for x in l.split()[1:]] for l in lines if l.startswith(b"v ")])
    assert np.all(np.isfinite(verts))


def test_mesh_layout_and_precision(tmp_path):
    out = tmp_path / "te.obj"
    assert cli.main(["generate", "--family", "trivial_enneper", "--nu", "3", "--nv", "2", "--u-range", "0:1",
                     "--v-range", "0:1", "--out", str(out)]) == 0
    text = out.read_text().splitlines()
    v = [l for l in text if l.startswith("v ")]
    f = [l for l in text if l.startswith("f ")]
    # vertex (u, v) = (0.5, 0): X = -(u^2/2, u, 0) written as x y l
    x, y, l = map(float, v[1].split()[1:])
    assert (x, y, l) == pytest.approx((-0.5, 0.0, -0.125), abs=1e-15)
    assert f[:2] == ["f 1 2 5", "f 1 5 4"]
    assert len(f) == 4
    # 17 significant digits round-trip the doubles exactly
    from isozmc import weierstrass as ws

    X = ws.integrate_surface(ws.trivial_enneper(), np.array([0, 0.5, 1, 1j, 0.5 + 1j, 1 + 1j]))
    got = np.array([[float(t) for t in s.split()[1:]] for s in v])
    np.testing.assert_array_equal(got, X[:, [1, 2, 0]])


def test_polyline_export(tmp_path):
    out = tmp_path / "b.obj"
    assert cli.main(["generate", "--family", "bonnet_type", "--nu", "9", "--nv", "7", "--lines", "3", "--out", str(out)]) == 0
    text = out.read_text()
    lrec = [l for l in text.splitlines() if l.startswith("l ")]
    assert len(lrec) == 6
    assert len(lrec[0].split()) == 1 + 9 and len(lrec[-1].split()) == 1 + 7
    side = (tmp_path / "b.obj.lines.txt").read_text()
    blocks = [b for b in side.split("\n\n") if b.strip()]
    assert len(blocks) == 6
    assert blocks[0].startswith("polyline 0 u-line")


def test_plane_mesh_is_flat(tmp_path):
    out = tmp_path / "p.obj"
    assert cli.main(["generate", "--family", "plane", "--out", str(out)]) == 0
    ls = {l.split()[3] for l in out.read_text().splitlines() if l.startswith("v ")}
    assert ls == {"0"}


def test_generate_refuses_metric_zero(tmp_path, capsys):
    rc = cli.main(["generate", "--family", "bonnet_type", "--u-range", "-1:1", "--v-range", "-1:1", "--nu", "5",
                   "--nv", "5", "--out", str(tmp_path / "x.obj")])
    assert rc == 3
    assert "(i=2, j=2)" in capsys.readouterr().err
    assert not (tmp_path / "x.obj").exists()


def test_verify_report(tmp_path):
    rep = tmp_path / "r.json"
    assert cli.main(["verify", "--family", "enneper_type", "--nu", "11", "--nv", "11", "--report", str(rep)]) == 0
    doc = json.loads(rep.read_text())
    assert list(doc) == ["tool", "version", "job", "model", "checks", "excluded", "overall_pass", "seed"]
    assert list(doc["checks"][0]) == ["name", "max_residual", "tolerance", "pass", "excluded_points"]
    assert doc["overall_pass"] is True
    assert doc["job"]["params"] == {"beta": 2.0}


def test_verify_failure_and_usage_codes(tmp_path, capsys):
    rep = tmp_path / "r.json"
    assert cli.main(["verify", "--family", "catenoid", "--nu", "11", "--nv", "11", "--tol-fd", "1e-15", "--report", str(rep)]) == 1
    assert "mean_curvature_fd" in capsys.readouterr().err
    assert json.loads(rep.read_text())["overall_pass"] is False
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["verify", "--config", str(bad)]) == 2
    bad.write_text(json.dumps({"family": "catenoid", "nu": 1}))
    assert cli.main(["verify", "--config", str(bad)]) == 2
    bad.write_text(json.dumps({"family": "torus"}))
    assert cli.main(["verify", "--config", str(bad)]) == 2
    assert cli.main(["verify", "--alpha", "-1"]) == 2
    assert cli.main(["verify", "--u-range", "1:0"]) == 2
    assert cli.main(["verify", "--tol-hopf", "0"]) == 2
    assert cli.main(["frobnicate"]) == 2


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"family": "catenoid", "nu": 7, "nv": 9, "tolerances": {"hopf": 1e-9}}))
    rep = tmp_path / "r.json"
    assert cli.main(["verify", "--config", str(cfg), "--nu", "5", "--tol-codazzi", "1e-9", "--report", str(rep)]) == 0
    job = json.loads(rep.read_text())["job"]
    assert (job["grid"]["nu"], job["grid"]["nv"]) == (5, 9)
    assert job["tolerances"]["hopf"] == 1e-9 and job["tolerances"]["codazzi"] == 1e-9


def test_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv("ISO_ZMC_THREADS", "0")
    assert cli.main(["verify", "--nu", "5", "--nv", "5", "--report", str(tmp_path / "r.json")]) == 2
    monkeypatch.setenv("ISO_ZMC_THREADS", "1")
    assert cli.main(["verify", "--nu", "5", "--nv", "5", "--report", str(tmp_path / "r.json")]) == 0


def test_conjugate_pairs(tmp_path):
    for fam in ("catenoid", "bonnet_type", "plane"):
        out = tmp_path / f"{fam}.obj"
        rep = tmp_path / f"{fam}.json"
        assert cli.main(["conjugate", "--family", fam, "--nu", "9", "--nv", "9", "--out", str(out), "--report", str(rep)]) == 0
        doc = json.loads(rep.read_text())
        assert doc["overall_pass"] is True
        assert (tmp_path / f"{fam}_conjugate.obj").exists()
    doc = json.loads((tmp_path / "catenoid.json").read_text())
    assert doc["hopf"]["surface"] == [-0.5, 0.0] and doc["hopf"]["conjugate"] == [0.0, -0.5]


def test_deform_polar(tmp_path):
    out = tmp_path / "polar"
    assert cli.main(["deform", "--kind", "polar", "--frames", "15", "--nu", "9", "--nv", "9", "--out", str(out)]) == 0
    assert len(list(out.glob("frame_*.obj"))) == 15
    doc = json.loads((out / "convergence.json").read_text())
    assert len(doc["params"]) == 15 and doc["params"][0] == 0.1 and doc["params"][-1] == pytest.approx(1.47)
    near0 = [r["dev_h"] for r in doc["convergence"]["theta0"]["rows"]]
    near90 = [r["dev_h"] for r in doc["convergence"]["theta_pi2"]["rows"]]
    assert all(b > a for a, b in zip(near0, near0[1:]))
    # far from pi/2 the deviation is flat; it shrinks steadily over the last half of the path
    tail = near90[len(near90) // 2:]
    assert all(b < a for a, b in zip(tail, tail[1:]))
    assert near90[-1] < 0.2 * near90[0]


def test_deform_tanh_ratios(tmp_path):
    out = tmp_path / "tanh"
    assert cli.main(["deform", "--kind", "tanh", "--params", "0.4,0.2,0.1,0.05", "--nu", "5", "--nv", "5", "--out", str(out)]) == 0
    conv = json.loads((out / "convergence.json").read_text())["convergence"]["limit"]
    for r in conv["ratios_h"] + conv["ratios_eta"]:
        assert 0.2 <= r <= 0.3


def test_single_frame_equals_generate(tmp_path):
    d = tmp_path / "one"
    assert cli.main(["deform", "--kind", "tanh", "--params", "0.5", "--nu", "6", "--nv", "6", "--out", str(d)]) == 0
    g = tmp_path / "g.obj"
    assert cli.main(["generate", "--family", "deform_tanh", "--alpha", "0.5", "--u-range", "-1:1", "--v-range", "-1:1",
                     "--nu", "6", "--nv", "6", "--out", str(g)]) == 0
    body = lambda p: [l for l in p.read_text().splitlines() if not l.startswith("#")]
    assert body(d / "frame_000.obj") == body(g)


def test_atomic_write_leaves_no_temp(tmp_path):
    p = tmp_path / "sub" / "a.txt"
    cli.atomic_write(p, "x\n")
    cli.atomic_write(p, "y\n")
    assert p.read_text() == "y\n"
    assert [q.name for q in p.parent.iterdir()] == ["a.txt"]


def test_console_script(tmp_path):
    rep = tmp_path / "r.json"
    env = dict(os.environ, ISO_ZMC_THREADS="1")
    proc = subprocess.run([sys.executable, "-m", "isozmc.cli", "verify", "--family", "plane", "--nu", "5", "--nv", "5",
                           "--report", str(rep)], capture_output=True, text=True, env=env)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(rep.read_text())["overall_pass"] is True
