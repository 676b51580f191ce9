import json
import os

import pytest
from invoke import Context
from invoke.exceptions import Exit

from jumpsets import tasks
from jumpsets.formats import read_json, read_mask, write_json


@pytest.fixture
def grid(tmp_path):
    path = str(tmp_path / "step.grid")
    tasks.generate(Context(), "halfspace_step", n=32, sigma=0.25, seed=1, output=path)
    return path


def test_generate(capsys, grid):
    assert os.path.exists(grid)
    sidecar = read_json(tasks.sidecar_path(grid))
    assert sidecar["catalog"] == "halfspace_step"
    assert sidecar["N"] == 32
    assert sidecar["betti"] == [1, 0]
    assert grid in capsys.readouterr().out


def test_generate_with_params(tmp_path):
    path = str(tmp_path / "circles.csv")
    tasks.generate(Context(), "two_circles", n=16, params='{"radii": [0.1, 0.1]}', csv=True, output=path)
    assert read_json(tasks.sidecar_path(path))["params"]["radii"] == [0.1, 0.1]


def test_estimate_metrics_and_topology(grid, tmp_path, capsys):
    mask_path = str(tmp_path / "step.mask")
    tasks.estimate(Context(), grid, output=mask_path)
    mask = read_mask(mask_path)
    summary = read_json(tasks.sidecar_path(mask_path))
    assert summary["cells"] == mask.count
    assert summary["params"]["threshold"] == 2
    assert set(summary["regime"]) == {"jump_dominates_modulus", "radius_below_reach", "radius_covers_cells"}
    capsys.readouterr()

    tasks.metrics(Context(), mask_path, truth=tasks.sidecar_path(grid))
    report = json.loads(capsys.readouterr().out)
    assert report["hausdorff"] >= 0

    tasks.metrics(Context(), mask_path, other=mask_path)
    assert json.loads(capsys.readouterr().out)["hausdorff"] == 0

    csv_path = str(tmp_path / "diagrams.csv")
    tasks.topology(Context(), mask_path, kappa=0.1, csv=csv_path)
    document = json.loads(capsys.readouterr().out)
    assert [betti["degree"] for betti in document["betti"]] == [0, 1]
    assert document["betti"][0]["count"] == 1
    assert os.path.exists(csv_path)


def test_library_errors_exit_with_code_2(grid, tmp_path):
    with pytest.raises(Exit) as excinfo:
        tasks.generate(Context(), "three_squares", output=str(tmp_path / "x.grid"))
    assert excinfo.value.code == 2

    bare = str(tmp_path / "bare.grid")
    os.rename(grid, bare)
    with pytest.raises(Exit) as excinfo:
        tasks.estimate(Context(), bare)
    assert excinfo.value.code == 2


def test_topology_needs_kappa(grid, tmp_path):
    mask_path = str(tmp_path / "step.mask")
    tasks.estimate(Context(), grid, output=mask_path)
    with pytest.raises(Exit) as excinfo:
        tasks.topology(Context(), mask_path)
    assert excinfo.value.code == 2
    tasks.topology(Context(), mask_path, auto_kappa=True, r=0.1, mu=1, output=str(tmp_path / "topology.json"))
    assert read_json(str(tmp_path / "topology.json"))["betti"][0]["kappa"] == pytest.approx(0.2)


def test_consistency_task(tmp_path, capsys):
    config = str(tmp_path / "config.json")
    write_json({"shape": "halfspace_step", "n_values": [64], "sigma": 0, "calibration_sigma": 0.25}, config)
    tasks.consistency(Context(), config, trials=2, output_dir=str(tmp_path / "out"))
    assert "N=64" in capsys.readouterr().out
    assert os.path.exists(str(tmp_path / "out" / "consistency.csv"))

    write_json({"shape": "halfspace_step", "n_values": [64], "l": 1000}, config)
    with pytest.raises(Exit) as excinfo:
        tasks.consistency(Context(), config, trials=1, output_dir=str(tmp_path / "out"))
    assert excinfo.value.code == 1


def test_rate_sweep_task(tmp_path, capsys):
    config = str(tmp_path / "config.json")
    write_json({"shape": "halfspace_step", "n_values": [64], "trials": 1}, config)
    tasks.rate_sweep(Context(), config, output_dir=str(tmp_path))
    assert "slope" in capsys.readouterr().out


def test_oracle_check(capsys):
    tasks.oracle_check(Context(), quick=True)
    out = capsys.readouterr().out
    assert "persistence" in out
    assert "failures" not in out
