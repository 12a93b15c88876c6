import math
from dataclasses import replace

import numpy as np
import pytest

from openbiphoton.designer import (
    DesignProblem,
    OptimizerSpec,
    Parameterization,
    design_profile,
    flatness,
    forward_spectrum,
    loss,
)
from openbiphoton.errors import ConfigError
from openbiphoton.phasematching import MatchingConfig, MatchingType, solve_pump_axis_angle
from openbiphoton.profiles import Quantity
from openbiphoton.spectrum import FrequencyGrid, QuadratureSpec, spectral_intensity

from conftest import PUMP_UM


@pytest.fixture(scope="module")
def matched_at_64(kdp):
    cfg = MatchingConfig(kdp, PUMP_UM, MatchingType.TYPE_I, length=0.02)
    return replace(cfg, pump_axis_angle=solve_pump_axis_angle(cfg, temperature=64.0))


def _gradient_problem(cfg, lower, upper, optimizer, n_points=129, true_gradient=2000.0):
    par = Parameterization("linear-gradient", (lower,), (upper,), start=24.0)
    grid = FrequencyGrid(5e14, n_points)
    quad = QuadratureSpec(tol=1e-5)
    template = DesignProblem(cfg, par, grid.omega, np.ones(n_points), grid, quad=quad)
    target = spectral_intensity(forward_spectrum(template, np.array([true_gradient])))
    return DesignProblem(cfg, par, grid.omega, target, grid, optimizer=optimizer, quad=quad)


def test_loss_norms():
    assert loss([1.0, 0.0], [0.0, 0.0]) == pytest.approx(1.0)
    assert loss(np.zeros(3), [1.0, 0.0, 0.5]) == pytest.approx(math.sqrt(1.25))
    assert loss([1.0, 0.0, -0.5], [0.0, 0.0, 0.0], "L1") == pytest.approx(1.5)
    assert loss([0.3, 0.7], [0.3, 0.7]) == 0.0
    with pytest.raises(ValueError):
        loss([1.0], [1.0, 0.0])
    with pytest.raises(ValueError):
        loss([1.0], [1.0], "Linf")


def test_loss_interpolates_between_grids():
    fine = np.linspace(-2.0, 2.0, 401)
    coarse = np.linspace(-1.0, 1.0, 21)
    assert loss(np.exp(-(fine**2)), np.exp(-(coarse**2)), "L2", fine, coarse) == pytest.approx(0.0, abs=1e-6)
    # Target points beyond the achieved grid are left out.
    wide = np.concatenate([[-3.0], coarse, [3.0]])
    assert loss(np.zeros(21), np.ones(23), "L1", coarse, wide) == pytest.approx(21.0)
    with pytest.raises(ValueError):
        loss(np.zeros(21), np.ones(21), "L2", coarse, coarse + 5.0)


def test_flatness():
    omega = np.linspace(-10.0, 10.0, 2001)
    top_hat = (np.abs(omega) <= 5.0).astype(float)
    assert flatness(top_hat, omega) == 0.0
    rippled = top_hat * (1.0 + 0.1 * np.cos(3 * omega))
    assert flatness(rippled, omega) == pytest.approx(0.1 / math.sqrt(2), rel=0.05)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"kind": "cubic-spline", "lower": (0.0,), "upper": (1.0,)},
        {"kind": "sectioned-temperature", "lower": (0.0, 0.0), "upper": (1.0,)},
        {"kind": "sectioned-temperature", "lower": (), "upper": ()},
        {"kind": "linear-gradient", "lower": (0.0, 0.0), "upper": (1.0, 1.0)},
        {"kind": "sectioned-field", "lower": (2.0,), "upper": (1.0,)},
        {"kind": "poling-chirp", "lower": (0.0,), "upper": (math.inf,)},
    ],
)
def test_parameterization_validation(kwargs):
    with pytest.raises(ConfigError):
        Parameterization(**kwargs)


def test_parameters_stay_inside_box():
    par = Parameterization("sectioned-temperature", (20.0, 30.0), (40.0, 30.0))
    box = par.to_box(np.array([-50.0, 50.0]))
    assert 20.0 <= box[0] <= 40.0
    assert box[1] == 30.0
    np.testing.assert_allclose(par.to_box(par.from_unit(np.array([0.5, 0.5]))), [30.0, 30.0])


def test_parameterization_builds_forward_inputs(kdp_type_i, kdp_type_ii):
    cfg, profile = Parameterization("sectioned-field", (0.0, 0.0), (1e6, 1e6)).build(kdp_type_i, np.array([1e5, 2e5]))
    assert cfg is kdp_type_i
    assert profile.quantity == Quantity.FIELD and profile.values == (1e5, 2e5)

    cfg, profile = Parameterization("poling-chirp", (0.0,), (1e-6,), start=0.0268).build(kdp_type_ii, np.array([2e-7]))
    assert profile is None
    assert (cfg.poling.kind, cfg.poling.kg0, cfg.poling.alpha) == ("chirped", 0.0268, 2e-7)


def test_design_problem_validation(kdp_type_i):
    par = Parameterization("linear-gradient", (0.0,), (1.0,))
    grid = FrequencyGrid(1e13, 129)
    with pytest.raises(ConfigError):
        DesignProblem(kdp_type_i, par, grid.omega, 0.5 * np.ones(129), grid)
    with pytest.raises(ConfigError):
        DesignProblem(kdp_type_i, par, grid.omega, np.ones(128), grid)
    with pytest.raises(ConfigError):
        DesignProblem(kdp_type_i, par, grid.omega, np.ones(129), grid, norm="L3")


def test_collapsed_bounds_take_one_evaluation(matched_at_64):
    problem = _gradient_problem(matched_at_64, 2000.0, 2000.0, OptimizerSpec(restarts=2))
    result = design_profile(problem)
    assert result.evaluations == 2
    assert result.restart_losses == [result.loss, result.loss]
    assert result.loss == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_array_equal(result.parameters, [2000.0])


def test_restarts_are_deterministic(matched_at_64):
    spec = OptimizerSpec(seed=7, restarts=3, max_evaluations=20)
    parallel = design_profile(_gradient_problem(matched_at_64, 1000.0, 3000.0, spec))
    serial = design_profile(_gradient_problem(matched_at_64, 1000.0, 3000.0, replace(spec, parallel=False)))
    np.testing.assert_array_equal(parallel.parameters, serial.parameters)
    assert parallel.loss == serial.loss
    assert parallel.trace == serial.trace
    assert parallel.restart_losses == serial.restart_losses


def test_restarts_must_be_positive(matched_at_64):
    problem = _gradient_problem(matched_at_64, 2000.0, 2000.0, OptimizerSpec(restarts=0))
    with pytest.raises(ConfigError):
        design_profile(problem)


@pytest.mark.slow
def test_recovers_linear_gradient(matched_at_64):
    problem = _gradient_problem(
        matched_at_64, 1000.0, 3000.0, OptimizerSpec(seed=1, restarts=4, max_evaluations=200), n_points=257
    )
    result = design_profile(problem)
    assert result.loss < 1e-1
    assert result.parameters[0] == pytest.approx(2000.0, rel=0.02)
    assert result.amplitude is not None


def test_reversed_sections_give_the_same_spectrum(matched_at_64):
    par = Parameterization("sectioned-temperature", (20.0,) * 3, (100.0,) * 3)
    grid = FrequencyGrid(5e14, 257)
    problem = DesignProblem(matched_at_64, par, grid.omega, np.ones(257), grid, quad=QuadratureSpec(tol=1e-8))
    forward = spectral_intensity(forward_spectrum(problem, np.array([84.0, 60.0, 44.0])))
    backward = spectral_intensity(forward_spectrum(problem, np.array([44.0, 60.0, 84.0])))
    assert loss(forward, backward) < 1e-6
