import json
import shutil
import subprocess
import sys

import pytest

from imblab.cli import EXIT_INVALID, EXIT_OK, EXIT_RUNTIME, main
from imblab.datagen import read_dataset
from imblab.harness import read_results
from imblab.harness.results import read_failures

SMALL = {
    "resamplers": ["Original"],
    "learners": ["LogisticRegression"],
    "ir_list": [1, 2],
    "n0_train": 30,
    "m0_test": 40,
    "repetitions": 2,
}


def _config(tmp_path, **overrides):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({**SMALL, **overrides}))
    return path


def test_generate(tmp_path, capsys):
    out = tmp_path / "d.csv"
    assert main(["generate", "--example", "2", "--ir", "4", "--n0", "25", "--seed", "3", "--out", str(out)]) == EXIT_OK
    ds = read_dataset(out)
    assert (ds.n0, ds.n1) == (25, 100)
    assert "125 rows" in capsys.readouterr().out


def test_generate_is_seeded(tmp_path):
    args = ["generate", "--example", "1", "--ir", "2", "--n0", "5", "--seed", "9", "--out"]
    main(args + [str(tmp_path / "a.csv")])
    main(args + [str(tmp_path / "b.csv")])
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["generate", "--example", "3", "--ir", "1", "--n0", "5", "--out", "x.csv"],
        ["generate", "--example", "1", "--ir", "1", "--n0", "0", "--out", "x.csv"],
        ["run"],
        ["bogus"],
    ],
)
def test_argument_errors_exit_invalid(argv):
    assert main(argv) == EXIT_INVALID


def test_generate_bad_ratio_is_invalid(tmp_path):
    assert main(["generate", "--example", "1", "--ir", "0.5", "--n0", "5", "--out", str(tmp_path / "x.csv")]) == EXIT_INVALID


def test_run_and_report(tmp_path):
    results = tmp_path / "res.csv"
    assert main(["run", "--config", str(_config(tmp_path)), "--out", str(results), "--quiet"]) == EXIT_OK
    records = read_results(results)
    assert len(records) == 3 * 2 * 9
    figs = tmp_path / "figs"
    assert main(["report", "--results", str(results), "--out-dir", str(figs)]) == EXIT_OK
    assert (figs / "best_combinations.csv").exists()
    assert (figs / "NP" / "Example1_type1.svg").exists()


def test_run_seed_environment(tmp_path, monkeypatch):
    cfg = _config(tmp_path, paradigms=["CC"], ir_list=[1])
    main(["run", "--config", str(cfg), "--out", str(tmp_path / "a.csv"), "--quiet"])
    monkeypatch.setenv("IMBLAB_SEED", "5")
    main(["run", "--config", str(cfg), "--out", str(tmp_path / "b.csv"), "--quiet"])
    assert (tmp_path / "a.csv").read_bytes() != (tmp_path / "b.csv").read_bytes()


def test_run_records_failures_in_sidecar(tmp_path):
    cfg = _config(tmp_path, n0_train=20, ir_list=[1])
    out = tmp_path / "res.csv"
    assert main(["run", "--config", str(cfg), "--out", str(out), "--quiet"]) == EXIT_OK
    fails = read_failures(tmp_path / "res.errors.csv")
    assert len(fails) == 2 and fails[0].error_type == "SampleTooSmall"


def test_run_all_failed_is_runtime_error(tmp_path):
    cfg = _config(tmp_path, n0_train=20, ir_list=[1], paradigms=["NP"])
    out = tmp_path / "res.csv"
    assert main(["run", "--config", str(cfg), "--out", str(out), "--quiet"]) == EXIT_RUNTIME
    assert not out.exists()


def test_run_invalid_config(tmp_path, capsys):
    cfg = _config(tmp_path, repetitions=0)
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "r.csv")]) == EXIT_INVALID
    assert "repetitions" in capsys.readouterr().err
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["run", "--config", str(bad), "--out", str(tmp_path / "r.csv")]) == EXIT_INVALID
    assert main(["run", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path / "r.csv")]) == EXIT_INVALID


def test_report_errors(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("not,a,results,file\n")
    assert main(["report", "--results", str(bad), "--out-dir", str(tmp_path / "o")]) == EXIT_INVALID
    assert main(["report", "--results", str(tmp_path / "none.csv"), "--out-dir", str(tmp_path / "o")]) == EXIT_INVALID
    header_only = tmp_path / "empty.csv"
    header_only.write_text("example,paradigm,resampler,learner,ir,metric,mean,stderr,rep_count\n")
    assert main(["report", "--results", str(header_only), "--out-dir", str(tmp_path / "o")]) == EXIT_RUNTIME


def test_console_script_entry_point(tmp_path):
    exe = shutil.which("imblab")
    cmd = [exe] if exe else [sys.executable, "-m", "imblab.cli"]
    proc = subprocess.run(cmd + ["generate", "--example", "1", "--ir", "1", "--n0", "3", "--out", str(tmp_path / "d.csv")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    proc = subprocess.run(cmd + ["--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "generate" in proc.stdout
