"""
Tests for the command-line surface: exit codes, stdout tables and the files each command leaves
in --out. Commands run in-process through dispatch() with stdout/stderr captured.
"""

import contextlib
import io
import json
import os
import sys
import tempfile
from dataclasses import replace

import numpy as np
import pandas as pd

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from jcc.cases import case_path, experiment_path
from jcc.cli import EXIT_DATA, EXIT_INFEASIBLE, EXIT_OK, EXIT_USAGE, dispatch
from jcc.learn import LabeledSet
from jcc.pipeline import config_hash, dataset_frame, load_config, write_json

SMALL = {"case": "case3", "seed": 7, "n_runs": 8, "n_scenarios": 10, "alphas": [0.0, 0.2],
         "mc_size": 200, "ensemble_size": 3, "comparison_alpha": 0.2, "n_test_samples": 2,
         "sweep_sizes": [1, 2, 3], "segments": 4, "beta_segments": 2,
         "uncertainty": {"wind_buses": [3], "mu_w": [20.0], "sigma_w": [8.0]}}


def _run(*argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = dispatch(list(argv))
    return code, out.getvalue(), err.getvalue()


def _small_config(tmp, **kw):
    return write_json(dict(SMALL, **kw), os.path.join(tmp, "small.json"))


def _hand_dataset(tmp):
    # Same shape as a generated case3 dataset: 8 runs x 2 alphas, label +1 when g2 >= 15 MW.
    rng = np.random.default_rng(1)
    p2 = rng.uniform(0.0, 40.0, size=16)
    labels = np.where(p2 >= 15.0, 1, -1)
    labels[:4] = (1, -1, 1, -1)              # runs 0 and 1 hold both labels
    data = LabeledSet(np.column_stack([130.0 - p2, p2]), labels, ("g1@1", "g2@2"),
                      tuple((r, a) for r in range(8) for a in (0.0, 0.2)))
    path = os.path.join(tmp, "hand.csv")
    dataset_frame(data).to_csv(path, index=False)
    return path


# ---------------------------------------------------------------------------------------------
# Usage and data errors
# ---------------------------------------------------------------------------------------------

def test_usage_errors():
    assert _run()[0] == EXIT_USAGE
    code, _, err = _run("parse-case", "--bogus")
    assert code == EXIT_USAGE and "--bogus" in err
    code, _, err = _run("solve-saa")
    assert code == EXIT_USAGE and "--config" in err
    assert _run("parse-case")[0] == EXIT_USAGE
    assert _run("sample", "--help")[0] == EXIT_OK


def test_missing_paths_are_data_errors():
    code, _, err = _run("parse-case", "no_such_case")
    assert code == EXIT_DATA and "no_such_case" in err
    code, _, err = _run("solve-saa", "--config", "no_such_experiment")
    assert code == EXIT_DATA and "no_such_experiment" in err


def test_broken_case_reports_line():
    with open(case_path("case3"), "r", encoding="utf-8") as f:
        text = f.read()
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "broken.m")
        with open(path, "w", encoding="utf-8") as f:
            f.write(text.replace("\t2\t3\t0\t0.1\t0\t120", "\t2\t3\t0\t0.1\t0\tabc"))
        code, _, err = _run("parse-case", path)
    assert code == EXIT_DATA
    assert "case error" in err and "line 24" in err, err


def test_bad_config_key_is_data_error():
    with tempfile.TemporaryDirectory() as tmp:
        cfg = _small_config(tmp, n_run=3)
        code, _, err = _run("sample", "--config", cfg)
    assert code == EXIT_DATA and "n_run" in err


def test_inadequate_capacity_is_infeasible():
    with open(case_path("case3"), "r", encoding="utf-8") as f:
        text = f.read()
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "weak.m")
        with open(path, "w", encoding="utf-8") as f:
            f.write(text.replace("100\t1\t200\t0;", "100\t1\t40\t0;"))
        code, _, err = _run("solve-det", path)
        assert code == EXIT_INFEASIBLE and "infeasible" in err
        cfg = _small_config(tmp, case=path)
        code, _, err = _run("solve-saa", "--config", cfg)
    assert code == EXIT_INFEASIBLE
    assert "infeasible" in err


# ---------------------------------------------------------------------------------------------
# Single-table commands
# ---------------------------------------------------------------------------------------------

def test_parse_case_prints_buses():
    code, out, _ = _run("parse-case", "case3")
    assert code == EXIT_OK
    frame = pd.read_csv(io.StringIO(out))
    assert list(frame.columns) == ["bus", "kind", "pd_mean"]
    assert list(frame["kind"]) == ["REF", "PV", "PQ"] and frame["pd_mean"].sum() == 150


def test_ptdf_json():
    code, out, _ = _run("ptdf", "case3", "--format", "json")
    assert code == EXIT_OK
    obj = json.loads(out)
    assert obj["slack"] == 1 and obj["bus_ids"] == [1, 2, 3]
    entries = np.array(obj["entries"])
    assert entries.shape == (3, 3) and np.allclose(entries[:, 0], 0.0)
    assert np.allclose(entries[:, 2], [-1 / 3, 1 / 3, -2 / 3])


def test_solve_det_table():
    code, out, _ = _run("solve-det", "case3")
    assert code == EXIT_OK
    row = pd.read_csv(io.StringIO(out)).iloc[0]
    assert row["kind"] == "det" and abs(row["cost"] - 2112.0) < 1e-4


def _logged_manifest(err):
    lines = [ln for ln in err.splitlines() if ln.startswith("INFO jcc: manifest ")]
    assert len(lines) == 1, err
    return json.loads(lines[0].split("manifest ", 1)[1])


def test_stdout_runs_log_their_manifest():
    code, _, err = _run("solve-det", "case3", "-v")
    assert code == EXIT_OK
    man = _logged_manifest(err)
    assert man["command"] == "solve-det" and man["outputs"] == ["<stdout>"]
    assert man["config_hash"] is None and "numpy" in man["versions"]
    code, out, err = _run("sample", "--config", "toy3", "--n", "3", "--seed", "8", "-v")
    assert code == EXIT_OK and len(pd.read_csv(io.StringIO(out))) == 3
    man = _logged_manifest(err)
    cfg = replace(load_config(experiment_path("toy3")), seed=8)
    assert man["seed"] == 8 and man["config_hash"] == config_hash(cfg)
    if not os.environ.get("JCC_LOG"):
        assert "manifest" not in _run("solve-det", "case3")[2]


def test_mode_flag_only_on_solving_commands():
    for command in ("sweep", "train-ensemble"):
        code, _, err = _run(command, "--config", "toy3", "--mode", "mean_affine")
        assert code == EXIT_USAGE and "--mode" in err, (command, err)
    code, _, err = _run("compare", "--config", "toy3", "--mode", "vote")
    assert code == EXIT_USAGE and "--mode" in err


def test_sample_rows_and_seed_override():
    code, out, _ = _run("sample", "--config", "toy3", "--n", "5")
    assert code == EXIT_OK
    frame = pd.read_csv(io.StringIO(out))
    assert len(frame) == 5 and list(frame.columns[:2]) == ["s", "omega"]
    again = pd.read_csv(io.StringIO(_run("sample", "--config", "toy3", "--n", "5")[1]))
    other = pd.read_csv(io.StringIO(_run("sample", "--config", "toy3", "--n", "5",
                                         "--seed", "8")[1]))
    assert frame.equals(again) and not frame.equals(other)


def test_solve_saa_then_validate():
    with tempfile.TemporaryDirectory() as tmp:
        cfg = _small_config(tmp)
        code, _, _ = _run("solve-saa", "--config", cfg, "--run", "2", "--format", "json",
                          "--out", tmp)
        assert code == EXIT_OK
        with open(os.path.join(tmp, "solution.json"), "r", encoding="utf-8") as f:
            solved = json.load(f)
        with open(os.path.join(tmp, "manifest.json"), "r", encoding="utf-8") as f:
            man = json.load(f)
        assert man["command"] == "solve-saa" and man["outputs"] == ["solution.json"]
        assert solved["solution"]["budget"] == 2

        sol_path = os.path.join(tmp, "solution.json")
        code, out, _ = _run("validate", "--config", cfg, "--run", "2", "--solution", sol_path,
                            "--format", "json")
        assert code == EXIT_OK
        assert json.loads(out)["violations"] == solved["expost"]["violations"]
        code, out, _ = _run("validate", "--config", cfg, "--run", "2", "--solution", sol_path,
                            "--in-sample")
        row = pd.read_csv(io.StringIO(out)).iloc[0]
        assert row["n_scenarios"] == 10 and row["violations"] <= 2

        code, _, err = _run("validate", "--config", cfg, "--solution", os.path.join(tmp, "x.json"))
        assert code == EXIT_DATA and "x.json" in err


# ---------------------------------------------------------------------------------------------
# Pipeline commands
# ---------------------------------------------------------------------------------------------

def test_gen_dataset_writes_files():
    with tempfile.TemporaryDirectory() as tmp:
        cfg = _small_config(tmp, n_runs=2)
        out = os.path.join(tmp, "out")
        assert _run("gen-dataset", "--config", cfg, "--out", out)[0] == EXIT_OK
        assert sorted(os.listdir(out)) == ["dataset.csv", "manifest.json", "runs.csv"]
        runs = pd.read_csv(os.path.join(out, "runs.csv"))
        assert len(runs) == 4 and set(runs["status"]) == {"ok"}
        with open(os.path.join(out, "manifest.json"), "r", encoding="utf-8") as f:
            man = json.load(f)
        assert man["rows"] == 4 and man["failed"] == 0 and man["seed"] == 7


def test_train_surrogate_compare_sweep():
    with tempfile.TemporaryDirectory() as tmp:
        cfg = _small_config(tmp)
        data = _hand_dataset(tmp)
        out = os.path.join(tmp, "out")

        assert _run("train-ensemble", "--config", cfg, "--dataset", data, "--out", out)[0] == EXIT_OK
        assert {"ensemble.json", "metrics.json", "manifest.json"} <= set(os.listdir(out))
        ens = os.path.join(out, "ensemble.json")
        with open(ens, "r", encoding="utf-8") as f:
            assert len(json.load(f)["planes"]) == 3

        code, out_text, _ = _run("solve-surrogate", "--config", cfg, "--ensemble", ens,
                                 "--mode", "mean_affine")
        assert code == EXIT_OK
        assert pd.read_csv(io.StringIO(out_text)).iloc[0]["kind"] == "surrogate"

        assert _run("compare", "--config", cfg, "--dataset", data, "--samples", "2",
                    "--out", out)[0] == EXIT_OK
        again = os.path.join(tmp, "again")
        assert _run("compare", "--config", cfg, "--dataset", data, "--samples", "2",
                    "--out", again)[0] == EXIT_OK
        with open(os.path.join(out, "report.csv"), "rb") as a, \
                open(os.path.join(again, "report.csv"), "rb") as b:
            assert a.read() == b.read()
        report = pd.read_csv(os.path.join(out, "report.csv"))
        assert list(report.columns[:5]) == ["Sample", "JCC-OPF($)", "Ensemble SVM($)",
                                            "ΔCost($)", "ΔCost(%)"]
        assert 1 <= len(report) <= 2
        assert os.path.isfile(os.path.join(out, "plot_cost_violations.csv"))

        assert _run("sweep", "--config", cfg, "--dataset", data, "--sizes", "1,2",
                    "--out", out)[0] == EXIT_OK
        sweep = pd.read_csv(os.path.join(out, "plot_ensemble_size.csv"))
        assert list(sweep["M"]) == [1, 2]


if __name__ == "__main__":
    fns = [v for k, v in sorted(globals().items()) if k.startswith("test_") and callable(v)]
    passed = 0
    for fn in fns:
        try:
            fn()
            print(f"PASS  {fn.__name__}")
            passed += 1
        except AssertionError as e:
            print(f"FAIL  {fn.__name__}: {e}")
        except Exception as e:  # noqa
            print(f"ERROR {fn.__name__}: {type(e).__name__}: {e}")
    print(f"\n{passed}/{len(fns)} cli tests passed")
    sys.exit(0 if passed == len(fns) else 1)
