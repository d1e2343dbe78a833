import json

import numpy as np
import pytest

from mfbm import __version__
from mfbm.cli import EXIT_CONFIG, EXIT_OK, EXIT_VERIFY, RunConfig, main, make_points
from mfbm.errors import ParameterError
from mfbm.simulator import read_samples


def data_rows(path):
    return [ln for ln in path.read_text().splitlines() if not ln.startswith("#")][1:]


def test_coeffs_cardinality(tmp_path):
    out = tmp_path / "c"
    assert main(["coeffs", "--N", "2", "--H", "0.5", "--M", "2", "--n-max", "3", "--out", str(out)]) == EXIT_OK
    rows = [r.split(",") for r in data_rows(out / "coefficients.csv")]
    assert len(rows) == 9
    assert sorted({int(r[0]) for r in rows}) == [0, 1, 2]
    assert all(sum(1 for r in rows if int(r[0]) == m) == 3 for m in range(3))
    side = json.loads((out / "coefficients.csv.json").read_text())
    assert side["version"] == __version__ and side["config"]["M"] == 2
    assert "total terms: 15" in (out / "summary.txt").read_text()


def test_coeffs_rerun_is_byte_identical(tmp_path):
    args = ["coeffs", "--N", "3", "--H", "0.3", "--M", "4", "--n-max", "6"]
    assert main(args + ["--out", str(tmp_path / "a"), "--threads", "1"]) == EXIT_OK
    assert main(args + ["--out", str(tmp_path / "b"), "--threads", "4"]) == EXIT_OK
    for name in ("coefficients.csv", "coefficients.csv.json", "summary.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_invalid_hurst_rejected(tmp_path, capsys):
    out = tmp_path / "c"
    assert main(["coeffs", "--H", "1.2", "--out", str(out)]) == EXIT_CONFIG
    assert not out.exists()
    assert "H must lie in (0, 1)" in capsys.readouterr().err


def test_unknown_tolerance_rejected(tmp_path):
    assert main(["verify", "--tolerance", "nonsense=1", "--out", str(tmp_path)]) == EXIT_CONFIG


def test_simulate_replicates_differ_and_origin_is_zero(tmp_path):
    out = tmp_path / "s"
    rc = main(["simulate", "--M", "4", "--n-max", "6", "--replicates", "2", "--seed", "3", "--out", str(out),
               "--points", '{"kind": "disk", "rings": 2, "per_ring": 5}'])
    assert rc == EXIT_OK
    meta, pts, vals = read_samples(out / "field.csv")
    assert meta["config"]["seed"] == 3 and meta["version"] == __version__
    assert vals.shape == (2, 11)
    assert not np.array_equal(vals[0], vals[1])
    origin = np.flatnonzero(np.all(pts == 0, axis=1))
    assert origin.size == 1
    assert np.all(vals[:, origin] == 0.0)
    raw = (out / "field.csv").read_text().splitlines()[2]
    assert raw == "0.0,0.0,0.0,0.0"


def test_simulate_separate_files(tmp_path):
    out = tmp_path / "s"
    assert main(["simulate", "--M", "2", "--n-max", "2", "--replicates", "3", "--separate", "--out", str(out)]) == EXIT_OK
    assert sorted(p.name for p in out.glob("field_*.csv")) == ["field_00000.csv", "field_00001.csv", "field_00002.csv"]


def test_simulate_outside_ball_names_point(tmp_path, capsys):
    rc = main(["simulate", "--out", str(tmp_path), "--points", '{"kind": "inline", "points": [[0.1, 0], [0.9, 0.9]]}'])
    assert rc == EXIT_CONFIG
    assert "point 1" in capsys.readouterr().err


@pytest.mark.parametrize("threads", ["2", "8"])
def test_simulate_byte_identical_across_threads(tmp_path, threads):
    args = ["simulate", "--M", "6", "--n-max", "10", "--replicates", "3",
            "--points", '{"kind": "lattice", "spacing": 0.25}']
    assert main(args + ["--threads", "1", "--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(args + ["--threads", threads, "--out", str(tmp_path / "b")]) == EXIT_OK
    assert (tmp_path / "a" / "field.csv").read_bytes() == (tmp_path / "b" / "field.csv").read_bytes()


def test_covariance_tables(tmp_path):
    out = tmp_path / "cov"
    assert main(["covariance", "--M", "2", "--n-max", "8", "--out", str(out)]) == EXIT_OK
    rows = data_rows(out / "radial_covariance.csv")
    assert len(rows) == 3 * 8 * 8
    field_rows = [r.split(",") for r in data_rows(out / "field_covariance.csv")]
    assert len(field_rows) == 11 * 12 // 2
    diag = [float(r.split(",")[1]) for r in data_rows(out / "truncation_diagnostic.csv")]
    assert all(0 <= d <= 1 for d in diag)


def test_verify_report(tmp_path):
    out = tmp_path / "v"
    assert main(["verify", "--out", str(out)]) == EXIT_OK
    report = json.loads((out / "verify.json").read_text())
    assert report["passed"] is True
    names = {c["name"] for c in report["checks"]}
    assert {"volterra_rel", "projection_rel", "orthonormality_abs", "parseval_gap", "gram_abs"} <= names
    assert all(c["measured"] <= c["tolerance"] for c in report["checks"])


def test_verify_injected_fault(tmp_path):
    out = tmp_path / "v"
    assert main(["verify", "--tolerance", "volterra_rel=0", "--out", str(out)]) == EXIT_VERIFY
    report = json.loads((out / "verify.json").read_text())
    assert report["passed"] is False
    failed = [c["name"] for c in report["checks"] if not c["passed"]]
    assert failed == ["volterra_rel"]


def test_config_file_and_override(tmp_path):
    cfg = RunConfig(N=3, H=0.4, M=2, n_max=3, seed=9, points={"kind": "ray", "count": 4}, out=str(tmp_path / "o"))
    path = tmp_path / "cfg.json"
    path.write_text(cfg.to_json())
    assert RunConfig.from_json(path.read_text()) == cfg
    assert main(["simulate", "--config", str(path), "--seed", "10"]) == EXIT_OK
    meta, pts, _ = read_samples(tmp_path / "o" / "field.csv")
    assert meta["config"]["seed"] == 10 and meta["config"]["N"] == 3
    assert pts.shape == (4, 3)


def test_config_rejects_unknown_keys():
    with pytest.raises(ParameterError):
        RunConfig.from_dict({"N": 2, "colour": "red"})


def test_point_sets():
    assert make_points({"kind": "ray", "count": 3}, 2, 2.0).tolist() == [[0, 0], [1, 0], [2, 0]]
    assert make_points({"kind": "disk", "rings": 1, "per_ring": 4}, 3, 1.0).shape == (5, 3)
    lat = make_points({"kind": "lattice", "spacing": 0.5}, 2, 1.0)
    assert len(lat) == 13 and np.all(np.linalg.norm(lat, axis=1) <= 1.0)
    with pytest.raises(ParameterError):
        make_points({"kind": "spiral"}, 2, 1.0)
