import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from oracles import cycle_metric, line_metric
from teichlab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def write_matrix(path, labels, D):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(labels)
        w.writerows(D.tolist())
    return str(path)


def test_farey_dist(capsys):
    code, out = run(capsys, "farey", "dist", "1/0", "5/8")
    assert code == 0 and json.loads(out)["distance"] == 3


def test_farey_ball_exports(capsys, tmp_path):
    dpath = tmp_path / "d.csv"
    code, out = run(capsys, "farey", "ball", "1/0", "1", "--denom-bound", "3", "--height", "2",
                    "--distances", str(dpath))
    assert code == 0 and out.startswith("vertex1,vertex2")
    assert "1/0,0" in dpath.read_text().splitlines()


def test_farey_out_of_universe_is_an_error(capsys):
    code = main(["farey", "dist", "1/9", "0/1", "--denom-bound", "4"])
    assert code == 3 and "outside" in capsys.readouterr().err


def test_electric_profile_csv(capsys):
    code, out = run(capsys, "electric", "profile", "--ray", "[1;(1)]", "--T", "1")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "t,d_el" and lines[-1].startswith("1.0,")


def test_electric_dist(capsys):
    code, out = run(capsys, "electric", "dist", "0,1", "0,30")
    data = json.loads(out)
    assert data["d_el"] < data["d_teich"]


def test_gromov_delta(capsys, tmp_path):
    path = write_matrix(tmp_path / "c4.csv", list("abcd"), cycle_metric(4))
    code, out = run(capsys, "gromov", "delta", path)
    assert json.loads(out)["delta"] == 1.0


def test_gromov_qi_fit(capsys, tmp_path):
    D = line_metric([0, 1, 3, 4])
    src = write_matrix(tmp_path / "a.csv", list("abcd"), D)
    tgt = write_matrix(tmp_path / "b.csv", list("wxyz"), 2 * D)
    rel = tmp_path / "r.csv"
    rel.write_text("a,w\nb,x\nc,y\nd,z\n")
    code, out = run(capsys, "gromov", "qi-fit", src, tgt, str(rel))
    data = json.loads(out)
    assert (data["k"], data["mu"]) == (2.0, 0.0) and data["cobounded_L"] == 0.0


def test_gromov_converge(capsys, tmp_path):
    n = 20
    path = write_matrix(tmp_path / "line.csv", [str(i) for i in range(n)], line_metric(range(n)))
    code, out = run(capsys, "gromov", "converge", path, "--sequence",
                    ",".join(str(i) for i in range(1, n)), "--base", "0")
    assert json.loads(out)["verdict"] == "diverging"


def test_lab_ray_writes_report(capsys, tmp_path):
    out = tmp_path / "report.json"
    code, text = run(capsys, "lab", "ray", "--target", "0/1", "--T", "12", "--out", str(out))
    report = json.loads(out.read_text())
    assert code == 0 and report["finding"] == "bounded"
    assert "ray: pass" in text


def test_lab_ray_flags_reach_the_config(capsys):
    code, out = run(capsys, "lab", "ray", "--target", "[1;(1)]", "--T", "2", "--grid", "0.3",
                    "--epsilon", "0.05", "--window", "1.5", "--seed", "4")
    prov = json.loads(out)["provenance"]
    assert prov["grid_step"] == 0.3 and prov["epsilon"] == 0.05 and prov["seed"] == 4
    assert "radius=1.5" in prov["window"]


def test_lab_exit_code_for_inconclusive(capsys):
    code, out = run(capsys, "lab", "segments", "--f", "[1;(1)]", "--g", "[1;(2)]", "--n", "1")
    assert code == 2 and json.loads(out)["verdict"] == "inconclusive"


def test_lab_separate_and_boundary(capsys):
    code, _ = run(capsys, "lab", "separate", "--f", "[1;(1)]", "--g", "[1;(2)]", "--n", "16")
    assert code == 0
    seq = "1/1,2/1,3/2,5/3,8/5,13/8,21/13,34/21,55/34,89/55,144/89,233/144,377/233,610/377,987/610,1597/987"
    code, out = run(capsys, "lab", "boundary-map", "--sequence", seq)
    assert code == 0 and json.loads(out)["metrics"]["farey_verdict"] == "diverging"


def test_lab_qi_audit_box_window(capsys):
    code, out = run(capsys, "lab", "qi-audit", "--denom", "1", "--geodesics", "2",
                    "--window", "-1.5", "0.5", "0.04", "30")
    assert code == 0 and json.loads(out)["parameters"]["denom_bound"] == 1


def test_rational_separation_redirects(capsys):
    assert main(["lab", "separate", "--f", "1/2", "--g", "[1;(1)]"]) == 3
    assert "ray_profile" in capsys.readouterr().err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "teichlab", "farey", "dist", "0/1", "2/5"],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["path"] == ["0/1", "1/2", "2/5"]
