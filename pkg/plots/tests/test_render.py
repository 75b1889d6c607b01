import os

import pytest

from ldpplots import PlotError, PlotSpec, load_rows, render
from ldpplots.cli import run_cli

HERE = os.path.dirname(__file__)
GOLDEN_BOUNDS = os.path.join(HERE, "golden_bounds.csv")
GOLDEN_ES = os.path.join(HERE, "golden_es.csv")


def test_spec_rejects_unknown_kind():
    with pytest.raises(PlotError):
        PlotSpec(GOLDEN_BOUNDS, "nope", "x.png")


def test_load_rows_golden():
    rows = load_rows(GOLDEN_BOUNDS)
    assert len(rows) == 6
    assert {r["task"] for r in rows} == {"frequency", "range"}


def test_missing_columns_diagnostic(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("task,epsilon\nfrequency,1.0\n")
    with pytest.raises(PlotError) as exc:
        load_rows(str(bad))
    assert "analytic_bound" in str(exc.value)


def test_empty_body_diagnostic(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text(
        "task,epsilon,D,D_R,m,n,trials,empirical_mse,analytic_bound,wall_time_ms\n"
    )
    with pytest.raises(PlotError, match="no data rows"):
        load_rows(str(empty))


def test_render_both_kinds(tmp_path):
    out1 = tmp_path / "bounds.png"
    render(PlotSpec(GOLDEN_BOUNDS, "mdrq_bounds", str(out1)))
    assert out1.stat().st_size > 0
    out2 = tmp_path / "es.png"
    render(PlotSpec(GOLDEN_ES, "es_comparison", str(out2)))
    assert out2.stat().st_size > 0


def test_rendering_is_deterministic_and_pure(tmp_path):
    before = open(GOLDEN_BOUNDS, "rb").read()
    a = tmp_path / "a.png"
    b = tmp_path / "b.png"
    render(PlotSpec(GOLDEN_BOUNDS, "mdrq_bounds", str(a)))
    render(PlotSpec(GOLDEN_BOUNDS, "mdrq_bounds", str(b)))
    assert a.read_bytes() == b.read_bytes()
    assert open(GOLDEN_BOUNDS, "rb").read() == before


def test_golden_points_below_bound():
    for r in load_rows(GOLDEN_BOUNDS):
        assert r["empirical_mse"] <= r["analytic_bound"]


def test_bound_line_vertex_count():
    rows = load_rows(GOLDEN_BOUNDS)
    assert len({r["epsilon"] for r in rows}) == 3


def test_cli_success_and_errors(tmp_path, capsys):
    out = tmp_path / "fig.png"
    assert run_cli(["--csv", GOLDEN_ES, "--kind", "es_comparison", "--out", str(out)]) == 0
    assert out.exists()
    assert run_cli(["--csv", "/nonexistent.csv", "--kind", "mdrq_bounds",
                    "--out", str(out)]) == 2
    assert run_cli(["--csv", GOLDEN_ES, "--kind", "bogus", "--out", str(out)]) == 1
    capsys.readouterr()
