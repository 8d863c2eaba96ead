"""Rendering tests against fixture CSVs produced by scaled-down soclab runs."""

import csv
import shutil
import subprocess

import numpy as np
import pytest
from PIL import Image

from socplots.cli import main
from socplots.render import DPI, FIGSIZE, FigureJob, PERFORMANCE_COLUMNS, SchemaError, render

SOCLAB = shutil.which("soclab")

pytestmark = pytest.mark.skipif(SOCLAB is None, reason="soclab CLI not on PATH")


@pytest.fixture(scope="module")
def fixture_csvs(tmp_path_factory):
    """Scaled-down runs of every figure preset through the soclab CLI."""
    root = tmp_path_factory.mktemp("csv")
    paths = {}
    for fig in range(1, 6):
        out = root / f"figure{fig}.csv"
        subprocess.run(
            [
                SOCLAB, "figure", "--id", str(fig), "--outer", "40",
                "--n-values", "2,4,8", "--seed", "9", "--out", str(out),
            ],
            check=True,
            capture_output=True,
        )
        paths[fig] = out
    out = root / "figure6.csv"
    subprocess.run(
        [
            SOCLAB, "figure", "--id", "6", "--map-points", "5",
            "--seed", "9", "--out", str(out),
        ],
        check=True,
        capture_output=True,
    )
    paths[6] = out
    return paths


def test_all_figures_render(fixture_csvs, tmp_path):
    for fig, src in fixture_csvs.items():
        out = tmp_path / f"fig{fig}.png"
        render(FigureJob(input_csv=src, figure_id=fig, output_image=out))
        assert out.stat().st_size > 0


def test_pixel_dimensions_golden(fixture_csvs, tmp_path):
    out = tmp_path / "fig1.png"
    render(FigureJob(input_csv=fixture_csvs[1], figure_id=1, output_image=out))
    with Image.open(out) as img:
        assert img.size == (int(FIGSIZE[0] * DPI), int(FIGSIZE[1] * DPI))


def test_map_fixture_is_diagonal_symmetric(fixture_csvs, tmp_path):
    with open(fixture_csvs[6], newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    vals = {(r["p1"], r["p2"]): float(r["value_diff"]) for r in rows}
    for (a, b), v in vals.items():
        assert vals[(b, a)] == v
    out = tmp_path / "fig6.png"
    render(FigureJob(input_csv=fixture_csvs[6], figure_id=6, output_image=out))
    assert out.stat().st_size > 0


def test_empty_but_valid_csv_renders(tmp_path):
    src = tmp_path / "empty.csv"
    with open(src, "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh, lineterminator="\n").writerow(PERFORMANCE_COLUMNS)
    code = main(["render", "--figure", "2", "--in", str(src), "--out", str(tmp_path / "e.png")])
    assert code == 0
    assert (tmp_path / "e.png").exists()


def test_schema_mismatch_exits_nonzero(tmp_path, capsys):
    src = tmp_path / "bad.csv"
    with open(src, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "N", "value"])
        w.writerow(["sdp", "2", "1.0"])
    code = main(["render", "--figure", "1", "--in", str(src), "--out", str(tmp_path / "b.png")])
    assert code == 1
    err = capsys.readouterr().err
    assert "missing=" in err and "value_mean" in err


def test_schema_error_lists_column_diff(tmp_path):
    src = tmp_path / "bad6.csv"
    with open(src, "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh, lineterminator="\n").writerow(["p1", "p2", "extra"])
    with pytest.raises(SchemaError) as exc:
        render(FigureJob(input_csv=src, figure_id=6, output_image=tmp_path / "x.png"))
    assert "value_diff" in exc.value.missing
    assert "extra" in exc.value.unexpected


def test_missing_file_exits_two(tmp_path):
    code = main(
        ["render", "--figure", "1", "--in", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "x.png")]
    )
    assert code == 2
