import json
from pathlib import Path

import pytest

from polymerlab.cli import CONFIG_HELP, main

DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    rc = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return rc, out, err


def write_config(tmp_path, **cfg):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


# -- small commands ---------------------------------------------------------------


def test_build_prints_manifest_and_lattice(capsys):
    rc, out, _ = run(capsys, "build", "--n", 3, "--seed", 5)
    assert rc == 0
    d = json.loads(out)
    assert d["command"] == "build" and d["config"]["seed"] == 5 and d["result"]["n"] == 3
    assert d["version"] and len(d["config_hash"]) == 16


def test_build_then_spectrum_and_polymer_from_file(tmp_path, capsys):
    rc, _, _ = run(capsys, "build", "--n", 4, "--seed", 1, "--out", tmp_path / "b")
    assert rc == 0
    lat = tmp_path / "b" / "lattice.json"
    manifest = json.loads((tmp_path / "b" / "manifest.json").read_text())
    assert manifest["files"] == ["lattice.json"]
    rc, out, _ = run(capsys, "spectrum", "--lattice", lat, "--k", 2)
    assert rc == 0 and len(json.loads(out)["result"]["log_inverse_singular_values"]) == 2
    rc, _, _ = run(capsys, "polymer", "--lattice", lat, "--k", 2, "--out", tmp_path / "p")
    assert rc == 0
    d = json.loads((tmp_path / "p" / "polymer.json").read_text())
    assert d["corner_Z"]["1"]["sign"] == 1
    assert (tmp_path / "p" / "table_1_1.csv").read_text().startswith("x,y,sign,logmag")


def test_same_seed_same_output(capsys):
    a = run(capsys, "build", "--n", 3, "--seed", 9)[1]
    b = run(capsys, "build", "--n", 3, "--seed", 9)[1]
    c = run(capsys, "build", "--n", 3, "--seed", 10)[1]
    assert a == b and a != c


def test_polymer_k_out_of_range(capsys):
    rc, _, err = run(capsys, "polymer", "--n", 3, "--k", 4)
    assert rc == 2 and "--k" in err


def test_surgery_trace(tmp_path, capsys):
    rc, _, _ = run(capsys, "surgery", "--n", 8, "--k", 2, "--cases", 3, "--trace", "--out", tmp_path)
    assert rc == 0
    d = json.loads((tmp_path / "surgery.json").read_text())
    assert d["summary"]["failures"] == 0 and len(d["reports"]) == 3
    assert all("trace" in r for r in d["reports"])


# -- verify -------------------------------------------------------------------------


def test_verify_duality_passes(capsys):
    rc, out, err = run(capsys, "verify", "duality", "--n", 5, "--cases", 5)
    assert rc == 0 and "[PASS] duality" in err
    assert json.loads(out)["result"]["passed"] is True


def test_verify_lgv_with_suite_flag(tmp_path, capsys):
    rc, out, _ = run(capsys, "verify", "--suite", "lgv", "--n", 3, "--k", 2, "--cases", 3, "--out", tmp_path)
    assert rc == 0 and "[PASS] lgv" in out
    assert json.loads((tmp_path / "verify.json").read_text())["passed"] is True


def test_verify_unknown_suite_is_usage_error(capsys):
    rc, _, err = run(capsys, "verify", "bogus")
    assert rc == 2 and "unknown suite" in err


def test_verify_failure_exits_nonzero(monkeypatch, capsys):
    from polymerlab import verify

    def broken(*args, **kwargs):
        return verify.SuiteResult("inverse", False, {}, [{"error": "injected"}], 0.0)

    monkeypatch.setattr(verify, "run_suite", broken)
    rc, _, err = run(capsys, "verify", "inverse")
    assert rc == 1 and "[FAIL] inverse" in err


# -- mc and report -------------------------------------------------------------------


def test_mc_smoke_deterministic(tmp_path, capsys):
    cfg = write_config(tmp_path, model="mixed", gamma=0.5, seed=3, sizes=[4], replicas=2)
    assert run(capsys, "mc", "--config", cfg, "--out", tmp_path / "a")[0] == 0
    assert run(capsys, "mc", "--config", cfg, "--out", tmp_path / "b", "--threads", 2)[0] == 0
    a = (tmp_path / "a" / "records.csv").read_text()
    assert a == (tmp_path / "b" / "records.csv").read_text()
    assert len(a.splitlines()) == 3
    report = json.loads((tmp_path / "a" / "report.json").read_text())
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert report["config_hash"] and report["schema_version"] == 1
    assert manifest["files"] == ["records.csv", "report.json", "timings.csv"]


def test_mc_seed_override(tmp_path, capsys):
    cfg = write_config(tmp_path, model="mixed", gamma=0.5, seed=3, sizes=[3], replicas=2)
    run(capsys, "mc", "--config", cfg, "--out", tmp_path / "a")
    run(capsys, "mc", "--config", cfg, "--out", tmp_path / "b", "--seed", 4)
    assert (tmp_path / "a" / "records.csv").read_text() != (tmp_path / "b" / "records.csv").read_text()


def test_mc_requires_config_and_out(tmp_path, capsys):
    rc, _, err = run(capsys, "mc", "--out", tmp_path)
    assert rc == 2 and CONFIG_HELP in err
    cfg = write_config(tmp_path, model="mixed", gamma=0.5, sizes=[3], replicas=1)
    rc, _, err = run(capsys, "mc", "--config", cfg)
    assert rc == 2 and "--out" in err


@pytest.mark.parametrize(
    "text",
    ["{not json", "[1, 2]", json.dumps({"model": "mixed", "gamma": 0.5, "sizes": [3]}), json.dumps({"model": "nope", "sizes": [3], "replicas": 1})],
)
def test_malformed_config_points_to_readme(tmp_path, capsys, text):
    path = tmp_path / "bad.json"
    path.write_text(text)
    rc, _, err = run(capsys, "mc", "--config", path, "--out", tmp_path / "o")
    assert rc == 2
    assert "Configuration" in err and "README" in err


def test_bad_seed_rejected(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["build", "--n", "3", "--seed", "-1"])
    assert exc.value.code == 2


def test_report_golden(tmp_path, capsys):
    rc, _, _ = run(capsys, "report", "--records", DATA / "golden_records.csv", "--gamma", 0.5, "--out", tmp_path)
    assert rc == 0
    assert (tmp_path / "plot_data.csv").read_bytes() == (DATA / "golden_plot_data.csv").read_bytes()


def test_report_requires_records(capsys):
    rc, _, err = run(capsys, "report")
    assert rc == 2 and "--records" in err
