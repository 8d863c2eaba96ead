"""Command-line surface: schema, determinism, exit codes."""

import csv
import json

import pytest

from soclab.cli import PERFORMANCE_COLUMNS, main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_figure_deterministic_and_schema(tmp_path, capsys):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    args = ["figure", "--id", "4", "--outer", "100", "--seed", "7", "--n-values", "2,3"]
    assert run(args + ["--out", str(a)], capsys)[0] == 0
    assert run(args + ["--out", str(b)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    rows = read_csv(a)
    assert [*rows[0]] == list(PERFORMANCE_COLUMNS)
    assert {r["method"] for r in rows} == {"sdp", "mpc"}
    assert {r["N"] for r in rows} == {"2", "3"}
    assert (tmp_path / "a.csv.config.json").exists()


def test_figure_map_schema(tmp_path, capsys):
    out = tmp_path / "map.csv"
    code, _, _ = run(
        ["figure", "--id", "6", "--seed", "3", "--map-points", "4", "--out", str(out)], capsys
    )
    assert code == 0
    rows = read_csv(out)
    assert len(rows) == 16
    assert {"p1", "p2", "value_diff"} <= set(rows[0])


def test_figure_unknown_id(tmp_path, capsys):
    code, _, _ = run(["figure", "--id", "9", "--out", str(tmp_path / "x.csv")], capsys)
    assert code == 2


def test_eval_analytic_row_and_debug_threshold(tmp_path, capsys):
    out = tmp_path / "eval.csv"
    code, stdout, _ = run(
        [
            "eval", "--method", "mpc", "--dist", '{"kind":"exponential","rate":1}',
            "--samples", "0.5,1.5", "--beta", "0.99", "--x1", "1", "--mode", "analytic",
            "--seed", "3", "--out", str(out),
        ],
        capsys,
    )
    assert code == 0
    # threshold at x1 = 1 for mpc with mu 1, beta 0.99, kappa 1
    assert "threshold(x1)=-0.010000000000000009" in stdout
    row = read_csv(out)[0]
    assert row["realizations"] == "0"
    assert abs(float(row["value_mean"]) - 1.2686696257000871) < 1e-9


def test_eval_zero_inventory(capsys):
    code, stdout, _ = run(
        [
            "eval", "--method", "sdp", "--dist", '{"kind":"exponential","rate":1}',
            "--samples", "1.0", "--x1", "0", "--mode", "analytic",
        ],
        capsys,
    )
    assert code == 0
    assert ",0.0," in stdout


def test_eval_modes_agree(capsys):
    base = [
        "eval", "--dist", '{"kind":"exponential","rate":1}', "--samples", "0.5,1.5",
        "--beta", "0.99", "--x1", "1", "--method", "sdp", "--seed", "11",
    ]
    _, out_a, _ = run(base + ["--mode", "analytic"], capsys)
    _, out_m, _ = run(base + ["--mode", "mc", "--paths", "20000", "--horizon", "1000"], capsys)
    va = float(out_a.strip().splitlines()[-1].split(",")[5])
    parts = out_m.strip().splitlines()[-1].split(",")
    vm, se = float(parts[5]), float(parts[6])
    tb = 0.99**1000 / 0.01 * 1.5
    assert abs(va - vm) <= 3.0 * (se + tb)


def test_eval_rejects_atomic_law_in_analytic_mode(capsys):
    code, _, err = run(
        [
            "eval", "--method", "mpc", "--dist", '{"kind":"pointmass","value":1}',
            "--samples", "1.0", "--mode", "analytic",
        ],
        capsys,
    )
    assert code == 2
    assert "atomless" in err


def test_check_dominance_exit_codes(capsys):
    base = [
        "check-dominance", "--dist", '{"kind":"exponential","rate":1}',
        "--samples", "0.5,6.0", "--beta", "0.99", "--x1", "1",
    ]
    code_hold, out, _ = run(base + ["--c0", "0.5"], capsys)
    assert code_hold == 0 and json.loads(out)["holds"] is True
    code_fail, out, _ = run(base, capsys)
    assert code_fail == 1 and json.loads(out)["holds"] is False
    code_err, _, _ = run(
        ["check-dominance", "--dist", "{bad json", "--samples", "1.0"], capsys
    )
    assert code_err == 2


def test_discount_sweep_contract(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code, stdout, _ = run(
        [
            "discount-sweep", "--betas", "0.9,0.99", "--n", "2", "--outer", "2000",
            "--seed", "5", "--out", str(out),
        ],
        capsys,
    )
    assert code == 0
    assert "monotone_decreasing=True" in stdout
    assert len(read_csv(out)) == 4


def test_bellman_verify_commands(capsys):
    assert run(["bellman", "verify-equivalence", "--example", "1"], capsys)[0] == 0
    assert run(["bellman", "verify-equivalence", "--example", "2"], capsys)[0] == 0
    assert run(["bellman", "verify-forecast-bound", "--example", "1"], capsys)[0] == 0
    assert run(["bellman", "verify-forecast-bound", "--example", "2"], capsys)[0] == 0
    code, out, _ = run(["bellman", "verify-switch", "--instances", "5", "--seed", "11"], capsys)
    assert code == 0
    assert json.loads(out)["failures"] == 0


def test_bellman_instance_file_round_trip(tmp_path, capsys):
    from soclab.bellman import example1_fixture, instance_to_json

    path = tmp_path / "inst.json"
    path.write_text(instance_to_json(example1_fixture()[0]), encoding="utf-8")
    code, out, _ = run(
        ["bellman", "verify-equivalence", "--example", "1", "--instance", str(path)], capsys
    )
    assert code == 0 and json.loads(out)["pass"] is True


def test_config_file_supplies_defaults(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"beta": 0.95, "samples": "0.5,1.5", "mode": "analytic"}))
    code, stdout, _ = run(
        [
            "eval", "--config", str(cfg), "--method", "mpc",
            "--dist", '{"kind":"exponential","rate":1}',
        ],
        capsys,
    )
    assert code == 0
    assert ",0.95," in stdout


def test_unwritable_output_path(capsys):
    code, _, err = run(
        [
            "figure", "--id", "1", "--outer", "5", "--n-values", "2",
            "--out", "/nonexistent-dir/x.csv",
        ],
        capsys,
    )
    assert code == 2 and "error:" in err
