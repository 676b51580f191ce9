import math

import numpy as np
import pytest

from jumpsets.synthgen import make_halfspace_step
from jumpsets.utils import (
    CalibrationParams,
    CubicalMask,
    InvalidParameterError,
    ObservationGrid,
    PersistenceDiagram,
    calibrate_h,
    calibrate_kappa,
    calibrate_r,
    regime_conditions,
    s_n,
)


def test_calibrate_h_known_sigma():
    assert calibrate_h(65536, 2, 1.0, 8) == pytest.approx(0.10407, abs=1e-5)


def test_calibrate_h_unknown_sigma():
    expected = math.log(65536) * math.sqrt(2 * math.log(65536) / 65536)
    assert calibrate_h(65536, 2, None, 8) == pytest.approx(expected)
    assert expected == pytest.approx(0.2040, abs=1e-4)


def test_calibrate_h_clamps_to_half():
    assert calibrate_h(16, 2, 1.0, 1) == 0.5


@pytest.mark.parametrize("n,sigma,l", [(65536, 0.0, 1), (1, 1.0, 1), (65536, 1.0, 0), (65536, 1.0, -2)])
def test_calibrate_h_rejects(n, sigma, l):
    with pytest.raises(InvalidParameterError):
        calibrate_h(n, 2, sigma, l)


def test_calibrate_r():
    assert calibrate_r(0.10407, 2, 1.0) == pytest.approx(0.25125, abs=1e-5)
    assert calibrate_r(0.1, 4, 1.0) == pytest.approx(0.3)
    assert calibrate_r(0.05, 2, None, n=65536) == pytest.approx(0.5545, abs=1e-4)


@pytest.mark.parametrize("mu", [0.0, -0.5, 1.5])
def test_calibrate_r_rejects_mu(mu):
    with pytest.raises(InvalidParameterError):
        calibrate_r(0.1, 2, mu)


def test_unknown_mu_needs_n():
    with pytest.raises(InvalidParameterError):
        calibrate_r(0.1, 2, None)
    with pytest.raises(InvalidParameterError):
        calibrate_kappa(0.1, None)


def test_calibrate_kappa():
    assert calibrate_kappa(0.25125, 1.0) == pytest.approx(0.5025)
    assert calibrate_kappa(0.1, 0.5) == pytest.approx(0.8)
    assert calibrate_kappa(0.1, None, n=65536) == pytest.approx(0.1 * math.log(65536))
    with pytest.raises(InvalidParameterError):
        calibrate_kappa(0, 1.0)


def test_s_n_rules():
    assert s_n("log", 100) == pytest.approx(math.log(100))
    assert s_n("loglog", 100) == pytest.approx(math.log(math.log(100)))
    assert s_n("sqrtlog", 100) == pytest.approx(math.sqrt(math.log(100)))
    with pytest.raises(InvalidParameterError):
        s_n("linear", 100)


def test_calibration_params_validation():
    params = CalibrationParams(0.1, 0.25, 0.5, 2.0)
    assert params.as_dict()["threshold"] == 2.0
    with pytest.raises(InvalidParameterError):
        CalibrationParams(0.6, 0.25, 0.5, 2.0)
    with pytest.raises(InvalidParameterError):
        CalibrationParams(0.1, 0.25, 0.5, 2.0, s_n_rule="linear")


def test_observation_grid():
    obs = ObservationGrid(2, 4, np.arange(16))
    assert obs.n == 16
    assert not obs.sigma_known
    np.testing.assert_allclose(obs.coordinates(5), [0.375, 0.375])
    assert obs.as_array()[1, 1] == 5
    with pytest.raises(InvalidParameterError):
        ObservationGrid(2, 4, np.arange(15))


def test_cubical_mask():
    mask = CubicalMask(2, 4, [[1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 1]])
    assert mask.count == 2
    np.testing.assert_allclose(mask.centers(), [[0.125, 0.125], [0.875, 0.875]])
    fine = mask.subdivide(2)
    assert fine.resolution == 8
    assert fine.count == 8
    assert mask.issubset(CubicalMask.full(2, 4))
    assert not CubicalMask.full(2, 4).issubset(mask)
    assert CubicalMask.empty(2, 4).is_empty()


def test_persistence_diagram():
    a = PersistenceDiagram(1, [(0, 2), (0, 1), (0, math.inf)])
    b = PersistenceDiagram(1, [(0, math.inf), (0, 1), (0, 2)])
    assert a == b
    assert len(a.finite()) == 2
    assert len(a.essential()) == 1
    with pytest.raises(InvalidParameterError):
        PersistenceDiagram(0, [(2, 1)])


def test_regime_conditions():
    spec = make_halfspace_step(2, 4)
    h = 0.05
    params = CalibrationParams(h, calibrate_r(h, 2, 1.0), calibrate_kappa(calibrate_r(h, 2, 1.0), 1.0), 2.0)
    assert regime_conditions(params, spec) == {
        "jump_dominates_modulus": True,
        "radius_below_reach": True,
        "radius_covers_cells": True,
    }


def test_calibrate_h_decreases_with_n():
    values = [calibrate_h(2**k, 2, 1.0, 8) for k in range(10, 25)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_calibrate_r_ratio():
    for h in (0.01, 0.1, 0.3):
        for d in (1, 2, 3):
            assert calibrate_r(h, d, 0.5) / h == pytest.approx((1 + math.sqrt(d)) / 0.5, rel=1e-12)
