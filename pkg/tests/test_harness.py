import math
import os

import agate
import pytest

from jumpsets.formats import read_json, write_json
from jumpsets.harness import (
    ExperimentConfig,
    fit_slope,
    lower_bound_separation,
    run_oracle_suite,
    run_rate_sweep,
    run_topology_consistency,
    run_trial,
)
from jumpsets.utils import InvalidParameterError


def read_csv(path):
    return agate.Table.from_csv(path)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"trials": 0},
        {"n_values": [128, 64]},
        {"n_values": [64, 64]},
        {"sigma": -1},
        {"sigma": 0},
        {"mu_mode": "maybe"},
        {"s_n_rule": "linear"},
        {"checks": {"area": True}},
        {"colour": "blue"},
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(InvalidParameterError):
        ExperimentConfig(**kwargs)


def test_config_defaults():
    config = ExperimentConfig(checks={"bottleneck": False}, sigma=0, calibration_sigma=0.25)
    assert config.checks == {"hausdorff": True, "sandwich": True, "betti": True, "bottleneck": False}
    assert config.as_dict()["n_values"] == [64, 128, 256, 512]
    assert ExperimentConfig(sigma=0, sigma_mode="unknown").sigma == 0


def test_config_from_file(tmp_path):
    path = str(tmp_path / "config.json")
    write_json({"shape": "halfspace_step", "n_values": [32, 64], "trials": 5, "seed": 3}, path)
    config = ExperimentConfig.from_file(path, trials=2, seed=None)
    assert config.shape == "halfspace_step"
    assert config.n_values == [32, 64]
    assert config.trials == 2
    assert config.seed == 3


def test_fit_slope():
    n_values = [64, 128, 256, 512]
    errors = [3 * math.sqrt(2 * math.log(N**2) / N**2) for N in n_values]
    assert fit_slope(n_values, errors, 2) == pytest.approx(0.5)
    assert fit_slope([64], [0.1], 2) is None
    assert fit_slope([64, 128], [0.1, None], 2) is None


def test_run_trial():
    config = ExperimentConfig(shape="two_circles", sigma=0.05, trials=1, seed=7)
    record = run_trial(config, 256, 0)
    assert record.failure is None
    assert record.seed == 7
    assert record.betti == (2, 2)
    assert record.sandwich
    assert record.bottleneck_ok
    assert record.hausdorff <= 2 * record.r + math.sqrt(2) * record.h


def test_run_trial_failure():
    config = ExperimentConfig(shape="halfspace_step", l=1000, trials=1)
    record = run_trial(config, 64, 0)
    assert record.failure == "EmptyCellError"
    assert record.betti is None


def test_single_n_sweep(tmp_path):
    config = ExperimentConfig(shape="halfspace_step", n_values=[64], trials=2, output_dir=str(tmp_path))
    result = run_rate_sweep(config)
    assert result.slope is None
    assert result.passed
    assert result.notices
    assert [row["N"] for row in result.summary] == [64]
    table = read_csv(os.path.join(str(tmp_path), "rate_sweep.csv"))
    assert len(table.rows) == 2
    assert "wall_time" not in table.column_names
    assert read_json(os.path.join(str(tmp_path), "rate_sweep.json"))["config"]["trials"] == 2


def test_sweep_is_deterministic(tmp_path):
    contents = []
    for name in ("a", "b"):
        output_dir = str(tmp_path / name)
        run_rate_sweep(ExperimentConfig(shape="halfspace_step", n_values=[32, 64], trials=2, output_dir=output_dir))
        with open(os.path.join(output_dir, "rate_sweep.csv"), "rb") as f:
            contents.append(f.read())
    assert contents[0] == contents[1]


def test_noiseless_consistency(tmp_path):
    config = ExperimentConfig(
        shape="halfspace_step",
        n_values=[64, 128],
        sigma=0,
        calibration_sigma=0.25,
        trials=2,
        output_dir=str(tmp_path),
        record_timing=True,
    )
    result = run_topology_consistency(config)
    assert result.passed
    for row in result.summary:
        assert row["failures"] == 0
        assert row["betti_match"] == 1.0
        assert row["sandwich"] == 1.0
        assert row["bottleneck_ok"] == 1.0
    for record in result.records:
        assert record.hausdorff <= record.r + math.sqrt(2) * record.h
    assert "wall_time" in read_csv(os.path.join(str(tmp_path), "consistency.csv")).column_names


def test_consistency_without_closed_form(tmp_path):
    config = ExperimentConfig(
        shape="pyramid_perturbation",
        n_values=[64],
        trials=1,
        checks={"hausdorff": False},
        output_dir=str(tmp_path),
    )
    result = run_topology_consistency(config)
    assert any("no closed-form diagram" in notice for notice in result.notices)
    assert "bottleneck_ok" not in result.summary[0]


def test_consistency_records_failures(tmp_path):
    config = ExperimentConfig(shape="halfspace_step", l=1000, n_values=[64], trials=2, output_dir=str(tmp_path))
    result = run_topology_consistency(config)
    assert not result.passed
    assert result.summary[0]["failures"] == 2
    table = read_csv(os.path.join(str(tmp_path), "consistency.csv"))
    assert [row["failure"] for row in table.rows] == ["EmptyCellError", "EmptyCellError"]


def test_lower_bound_separation():
    result = lower_bound_separation(2, 0.1, math.pi / 3, 4)
    assert result["vertex_offset"] == pytest.approx(0.2)
    assert result["hausdorff"] == pytest.approx(0.2, abs=2 * result["cell_diagonal"])


def test_quick_oracle_suite():
    report = run_oracle_suite(quick=True, seed=1)
    assert report.passed, report.as_dict()
    assert {result.name for result in report.results} == {
        "distance_transform",
        "persistence",
        "bottleneck",
        "hausdorff",
        "histogram",
        "stability",
    }


@pytest.mark.slow
def test_two_circles_consistency(tmp_path):
    config = ExperimentConfig(shape="two_circles", n_values=[256], sigma=0.05, trials=20, output_dir=str(tmp_path))
    result = run_topology_consistency(config)
    assert result.passed
    assert result.summary[0]["betti_match"] >= 0.9


@pytest.mark.slow
def test_rate_sweep_decreases(tmp_path):
    config = ExperimentConfig(shape="halfspace_step", n_values=[64, 128, 256], trials=3, output_dir=str(tmp_path))
    result = run_rate_sweep(config)
    assert result.slope > 0


@pytest.mark.slow
def test_two_circles_sandwich_under_heavier_noise(tmp_path):
    config = ExperimentConfig(
        shape="two_circles",
        n_values=[256],
        sigma=0.25,
        trials=20,
        checks={"betti": False},
        output_dir=str(tmp_path),
    )
    result = run_topology_consistency(config)
    assert result.summary[0]["sandwich"] >= 0.9
    assert result.summary[0]["bottleneck_violations"] == 0


def test_pyramid_sweep_at_small_n(tmp_path):
    config = ExperimentConfig(shape="pyramid_perturbation", n_values=[32, 64], trials=2, output_dir=str(tmp_path))
    result = run_rate_sweep(config)
    assert len(result.records) == 4
    assert [row["N"] for row in result.summary] == [32, 64]
    assert os.path.exists(os.path.join(str(tmp_path), "rate_sweep.csv"))


def test_trials_in_worker_processes(tmp_path):
    contents = []
    for jobs in (1, 2):
        output_dir = str(tmp_path / str(jobs))
        config = ExperimentConfig(shape="halfspace_step", n_values=[32], trials=2, jobs=jobs, output_dir=output_dir)
        run_rate_sweep(config)
        with open(os.path.join(output_dir, "rate_sweep.csv"), "rb") as f:
            contents.append(f.read())
    assert contents[0] == contents[1]


def test_rate_outside_tolerance_is_reported(tmp_path):
    config = ExperimentConfig(
        shape="halfspace_step",
        n_values=[32, 64, 128],
        trials=2,
        slope_tolerance=0,
        output_dir=str(tmp_path),
    )
    result = run_rate_sweep(config)
    assert result.slope is not None
    assert result.tail_slope is not None
    assert not result.passed
    assert any(notice.startswith("Fitted rate") for notice in result.notices)
    assert read_json(os.path.join(str(tmp_path), "rate_sweep.json"))["passed"] is False


@pytest.mark.slow
@pytest.mark.xfail(reason="pre-asymptotic at N=64: the fitted rate is near 0.3", strict=False)
def test_two_circles_rate(tmp_path):
    config = ExperimentConfig(shape="two_circles", n_values=[64, 128, 256, 512], trials=10, output_dir=str(tmp_path))
    result = run_rate_sweep(config)
    assert result.passed
    assert 0.35 <= result.slope <= 0.65


@pytest.mark.slow
def test_two_circles_rate_verdict(tmp_path):
    config = ExperimentConfig(shape="two_circles", n_values=[64, 128, 256, 512], trials=10, output_dir=str(tmp_path))
    result = run_rate_sweep(config)
    assert result.slope > 0
    assert result.tail_slope > 0
    assert result.passed == (abs(result.slope - 0.5) <= 0.15)
    if not result.passed:
        assert any(notice.startswith("Fitted rate") for notice in result.notices)
