import json

import numpy as np
import pytest

from metricldp.cli import run_cli
from metricldp.domain import DomainSpec
from metricldp import mdrq


def run(capsys, *argv):
    code = run_cli(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_usage_error_exit_code(capsys):
    code, _, _ = run(capsys, "nonsense")
    assert code == 1
    code, _, _ = run(capsys, "simulate")  # missing --config
    assert code == 1


def test_help_exits_zero(capsys):
    for sub in ("simulate", "optimize", "encode", "aggregate", "query", "validate-metric"):
        assert run_cli([sub, "--help"]) == 0
        capsys.readouterr()


def test_optimize_prefix_scales_example(capsys):
    code, out, _ = run(capsys, "optimize", "prefix-scales", "--epsilon", "0.5", "--m", "4")
    assert code == 0
    assert "scales: 2,2,2,0" in out
    assert "total_error_per_owner: 96" in out


def test_optimize_freq_scales(capsys):
    metric = json.dumps({"kind": "super_sensitive", "epsilon": 1.0, "S": [1]})
    code, out, _ = run(capsys, "optimize", "freq-scales", "--metric", metric, "--m", "10")
    assert code == 0
    assert out.startswith("scales:")
    objective = float(out.strip().split()[-1])
    assert 0 < objective < 8 * 10


def test_optimize_missing_flag_is_domain_error(capsys):
    code, _, err = run(capsys, "optimize", "prefix-scales", "--m", "4")
    assert code == 2 and "epsilon" in err


def test_validate_metric(capsys):
    metric = json.dumps({"kind": "l1", "epsilon": 1.0})
    code, out, _ = run(capsys, "validate-metric", "--metric", metric, "--m", "8")
    assert code == 0
    assert json.loads(out)["is_metric"] is True

    bad = json.dumps({"kind": "table", "values": [[0, 1, 5], [1, 0, 1], [5, 1, 0]]})
    code, out, _ = run(capsys, "validate-metric", "--metric", bad, "--m", "3")
    assert code == 0
    report = json.loads(out)
    assert report["triangle"] is False
    assert report["first_violation"] == [1, 2, 3]


def test_encode_aggregate_query_pipeline(tmp_path, capsys):
    data = tmp_path / "data.csv"
    data.write_text("1,1\n2,3\n")
    reports = tmp_path / "reports.csv"
    code, _, _ = run(capsys, "encode", "--data", str(data), "--dims", "3,3",
                     "--epsilon", "1.0", "--out", str(reports), "--seed", "7")
    assert code == 0 and reports.exists()

    obs = tmp_path / "obs.csv"
    code, out, _ = run(capsys, "aggregate", "--reports", str(reports), "--out", str(obs))
    assert code == 0 and "owners: 2" in out

    code, out, _ = run(capsys, "query", "--obs", str(obs), "--dims", "3,3",
                       "--epsilon", "1.0", "--n", "2", "--range", "1:1,1:1")
    assert code == 0 and out.startswith("estimate:")

    # the printed estimate equals the library's own computation
    loaded = mdrq.read_observations_csv(obs, 2)
    from metricldp.domain import RangeQuery

    expected = mdrq.estimate_range(loaded, RangeQuery(((1, 1), (1, 1))), 1.0, DomainSpec((3, 3)))
    assert float(out.split()[-1]) == pytest.approx(expected, rel=1e-9)


def test_encode_is_seed_deterministic(tmp_path, capsys):
    data = tmp_path / "data.csv"
    data.write_text("1\n3\n2\n")
    out1, out2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
    for out in (out1, out2):
        assert run_cli(["encode", "--data", str(data), "--dims", "4",
                        "--epsilon", "0.5", "--out", str(out), "--seed", "3"]) == 0
    capsys.readouterr()
    assert out1.read_text() == out2.read_text()


def test_query_quantile(tmp_path, capsys):
    data = tmp_path / "data.csv"
    data.write_text("".join(f"{1 + i % 4}\n" for i in range(40)))
    reports = tmp_path / "r.csv"
    obs = tmp_path / "o.csv"
    run_cli(["encode", "--data", str(data), "--dims", "4", "--epsilon", "2.0",
             "--out", str(reports), "--seed", "1"])
    run_cli(["aggregate", "--reports", str(reports), "--out", str(obs)])
    capsys.readouterr()
    code, out, _ = run(capsys, "query", "--obs", str(obs), "--dims", "4",
                       "--epsilon", "2.0", "--n", "40", "--quantile", "0.5")
    assert code == 0
    assert "quantile:" in out and "probes:" in out


def test_query_requires_exactly_one_mode(tmp_path, capsys):
    obs = tmp_path / "o.csv"
    obs.write_text("flat_index,value\n1,0\n2,0\n")
    code, _, err = run(capsys, "query", "--obs", str(obs), "--dims", "2",
                       "--epsilon", "1.0", "--n", "0")
    assert code == 2 and "exactly one" in err


def test_missing_file_is_domain_error(capsys):
    code, _, err = run(capsys, "aggregate", "--reports", "/nonexistent.csv",
                       "--out", "/tmp/x.csv")
    assert code == 2 and err


def test_simulate_byte_identical(tmp_path, capsys):
    cfg = {"task": "frequency", "dims": [3, 3], "n": 50, "epsilons": [1.0], "trials": 2}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    outs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        assert run_cli(["simulate", "freq", "--config", str(path),
                        "--seed", "7", "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    capsys.readouterr()
    assert outs[0] == outs[1]


def test_simulate_to_stdout_with_task_alias(tmp_path, capsys):
    cfg = {"task": "frequency", "dims": [4], "n": 30, "epsilons": [1.0], "trials": 1}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    code, out, _ = run(capsys, "simulate", "workload", "--config", str(path), "--seed", "1")
    assert code == 0
    assert out.splitlines()[1].startswith("linear-workload,")


def test_capacity_error_exit_code(tmp_path, capsys):
    data = tmp_path / "data.csv"
    data.write_text("1,1\n")
    reports = tmp_path / "r.csv"
    dims = "8192,8192"  # 2^26 cells, past the dense gate
    run_cli(["encode", "--data", str(data), "--dims", dims,
             "--epsilon", "1.0", "--out", str(reports), "--seed", "0"])
    capsys.readouterr()
    code, _, err = run(capsys, "aggregate", "--reports", str(reports), "--out",
                       str(tmp_path / "o.csv"))
    assert code == 3 and "gate" in err
