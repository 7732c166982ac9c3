"""Command-line surface: each subcommand end to end on tiny inputs."""

from __future__ import annotations

import json

import numpy as np
import pytest
from click.testing import CliRunner
from conftest import make_doc

from sitblend.cli import main
from sitblend.manifest import read_manifest
from sitblend.png import read_png, write_png


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def workdir(tmp_path):
    spec = tmp_path / "chart.json"
    spec.write_text(json.dumps(make_doc()))
    bg = tmp_path / "bg.png"
    write_png(bg, np.full((96, 128, 3), 150, dtype=np.uint8))
    return tmp_path


def test_version(runner):
    result = runner.invoke(main, ["--version"])
    assert result.exit_code == 0


def test_render(runner, workdir):
    out = workdir / "chart.png"
    result = runner.invoke(main, ["render", str(workdir / "chart.json"),
                                  "-o", str(out)])
    assert result.exit_code == 0, result.output
    assert read_png(out).shape == (160, 160, 3)


def test_render_rejects_bad_spec(runner, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"idiom": "nope"}))
    result = runner.invoke(main, ["render", str(bad), "-o", str(tmp_path / "x.png")])
    assert result.exit_code == 2
    assert "error" in result.output or "error" in (result.stderr or "")


def test_extract_kinds(runner, workdir):
    chart = workdir / "chart.png"
    runner.invoke(main, ["render", str(workdir / "chart.json"), "-o", str(chart)])
    for kind in ("canny", "scribble", "softedge", "hed"):
        out = workdir / f"map_{kind}.png"
        result = runner.invoke(main, ["extract", str(chart), "--kind", kind,
                                      "-o", str(out)])
        assert result.exit_code == 0, (kind, result.output)
        assert read_png(out, mode="L").shape == (160, 160)


def test_compose(runner, workdir):
    chart = workdir / "chart.png"
    cmap = workdir / "map.png"
    runner.invoke(main, ["render", str(workdir / "chart.json"), "-o", str(chart)])
    runner.invoke(main, ["extract", str(chart), "-o", str(cmap)])
    out = workdir / "composed.png"
    result = runner.invoke(main, ["compose", str(cmap), str(workdir / "bg.png"),
                                  "--relative-scale", "0.5", "-o", str(out)])
    assert result.exit_code == 0, result.output
    composed = read_png(out, mode="L")
    assert composed.shape == (96, 128)
    assert composed.any()


def test_generate_mock(runner, workdir):
    composed = workdir / "composed.png"
    arr = np.zeros((96, 128), dtype=np.uint8)
    arr[30, :] = 255
    write_png(composed, arr)
    out = workdir / "gen.png"
    result = runner.invoke(main, [
        "generate", "--background", str(workdir / "bg.png"),
        "--outline", str(composed), "--prompt", "bars on a wall",
        "--mock", "-o", str(out),
    ])
    assert result.exit_code == 0, result.output
    assert read_png(out).shape == (96, 128, 3)


def test_generate_without_backend_fails(runner, workdir, monkeypatch):
    monkeypatch.delenv("SITBLEND_BACKEND_URL", raising=False)
    result = runner.invoke(main, [
        "generate", "--background", str(workdir / "bg.png"),
        "--outline", str(workdir / "bg.png"), "--prompt", "p",
        "-o", str(workdir / "x.png"),
    ])
    assert result.exit_code == 2


def test_upscale(runner, workdir):
    out = workdir / "up.png"
    result = runner.invoke(main, ["upscale", str(workdir / "bg.png"),
                                  "--factor", "2", "--grid", "2x2",
                                  "-o", str(out)])
    assert result.exit_code == 0, result.output
    assert read_png(out).shape == (192, 256, 3)


def test_upscale_rejects_bad_grid(runner, workdir):
    result = runner.invoke(main, ["upscale", str(workdir / "bg.png"),
                                  "--grid", "eight", "-o", str(workdir / "x.png")])
    assert result.exit_code != 0
    assert "ROWSxCOLS" in result.output


def test_run_and_verify_round_trip(runner, workdir):
    data = workdir / "data"
    result = runner.invoke(main, [
        "run", "--spec", str(workdir / "chart.json"),
        "--background", str(workdir / "bg.png"),
        "--mock", "--seed", "42", "--run-id", "testrun00001",
        "--data-dir", str(data),
    ])
    assert result.exit_code == 0, result.output
    assert "stable_hash" in result.output
    run_dir = data / "runs" / "testrun00001"
    manifest = read_manifest(run_dir / "manifest.json")
    assert manifest.run_id == "testrun00001"
    assert set(manifest.artifacts) == {
        "chart", "background", "outline", "output", "legibility",
    }

    verified = runner.invoke(main, ["verify", str(run_dir)])
    assert verified.exit_code == 0, verified.output
    assert json.loads(verified.output)["passed"] is True


def test_run_with_config_and_overrides(runner, workdir):
    cfg_path = workdir / "cfg.json"
    cfg_path.write_text(json.dumps({"generation": {"seed": 3}}))
    data = workdir / "data"
    result = runner.invoke(main, [
        "run", "--spec", str(workdir / "chart.json"),
        "--background", str(workdir / "bg.png"),
        "--config", str(cfg_path), "--prompt", "override prompt",
        "--seed", "9", "--mock", "--run-id", "cfg000000000",
        "--data-dir", str(data),
    ])
    assert result.exit_code == 0, result.output
    manifest = read_manifest(data / "runs" / "cfg000000000" / "manifest.json")
    assert manifest.config["generation"]["prompt"] == "override prompt"
    assert manifest.config["generation"]["seed"] == 9


def test_run_upscale_flag(runner, workdir):
    data = workdir / "data"
    result = runner.invoke(main, [
        "run", "--spec", str(workdir / "chart.json"),
        "--background", str(workdir / "bg.png"),
        "--mock", "--upscale", "--run-id", "up0000000000",
        "--data-dir", str(data),
    ])
    assert result.exit_code == 0, result.output
    up = read_png(data / "runs" / "up0000000000" / "upscaled.png")
    assert up.shape == (96 * 4, 128 * 4, 3)


def test_help_lists_all_subcommands(runner):
    result = runner.invoke(main, ["--help"])
    for sub in ("render", "extract", "compose", "generate", "upscale",
                "verify", "run", "serve"):
        assert sub in result.output
