"""Tests for coprime factors, Youla controllers, residual maps and mode compensators."""
import numpy as np
import pytest

from src.errors import ConfigError, DimensionError, UnstableSystemError
from src.factory import (
    FactorGains,
    ModeSet,
    YoulaParam,
    build_bezout_factors,
    internally_stable,
    io_from_mode_residuals,
    io_from_residuals,
    random_dwell_schedule,
    reparameterize_mode,
    residual_generator,
    residuals_from_io,
    verify_bezout,
    youla_controller,
)
from src.sscore import NoiseSpec, Signal, StateSpaceModel, freq_response_grid, frequency_grid, kalman_gain, lq_gain, simulate


class TestBezoutFactors:

    def test_toy_identity(self, toy_factors):
        assert verify_bezout(toy_factors) < 1e-9

    def test_robot_identity(self, robotino_factors):
        assert verify_bezout(robotino_factors) < 1e-9

    def test_weighted_identity(self, toy_plant, toy_factors):
        gains = FactorGains(toy_factors.F, toy_factors.L, W=[[2.0]], V=[[0.5]])
        assert verify_bezout(build_bezout_factors(toy_plant, gains)) < 1e-9

    def test_rejects_destabilizing_feedback(self, toy_plant, toy_factors):
        with pytest.raises(UnstableSystemError, match="A \\+ BF"):
            build_bezout_factors(toy_plant, FactorGains([[5.0, 5.0]], toy_factors.L))

    def test_rejects_wrong_gain_shape(self, toy_plant, toy_factors):
        with pytest.raises(DimensionError):
            build_bezout_factors(toy_plant, FactorGains([[1.0, 0.0, 0.0]], np.ones((3, 1))))


class TestYoula:

    @pytest.fixture
    def param(self, toy_plant):
        return YoulaParam(StateSpaceModel.build([[0.2]], [[1.0]], [[0.1]], [[0.05]], toy_plant.Ts))

    def test_observer_form_stabilizes(self, toy_factors, param):
        K = youla_controller(toy_factors, param)
        assert internally_stable(toy_factors.plant, K)

    @pytest.mark.parametrize("form", ["left", "right"])
    def test_coprime_forms_agree_with_observer(self, toy_factors, param, form):
        omegas = frequency_grid(toy_factors.plant.Ts, 24)
        observer = freq_response_grid(youla_controller(toy_factors, param), omegas)
        other = freq_response_grid(youla_controller(toy_factors, param, form), omegas)
        np.testing.assert_allclose(other, observer, atol=1e-9)

    def test_zero_parameter_is_observer_feedback(self, toy_factors):
        K = youla_controller(toy_factors, YoulaParam.zero(1, 1))
        assert K.n == toy_factors.plant.n
        np.testing.assert_allclose(K.D, np.zeros((1, 1)))

    def test_unstable_parameter(self):
        with pytest.raises(UnstableSystemError, match="Youla parameter"):
            YoulaParam(StateSpaceModel.build([[1.5]], [[1.0]], [[1.0]], [[0.0]]))

    def test_parameter_dimensions(self, robotino_factors):
        with pytest.raises(DimensionError, match="Q must be 3x3"):
            YoulaParam.zero(1, 1).check_dims(robotino_factors)


class TestResidualMap:

    def test_reconstructs_io(self, toy_factors, rng):
        param = YoulaParam(StateSpaceModel.static([[0.3]]))
        u = Signal(rng.standard_normal((80, 1)))
        y = Signal(rng.standard_normal((80, 1)))
        r_u, r_y = residuals_from_io(toy_factors, param, u, y)
        u2, y2 = io_from_residuals(toy_factors, param, r_u, r_y)
        np.testing.assert_allclose(u2.values, u.values, atol=1e-9)
        np.testing.assert_allclose(y2.values, y.values, atol=1e-9)

    def test_plant_data_gives_zero_output_residual(self, toy_factors, rng):
        u = rng.standard_normal((60, 1))
        y = simulate(toy_factors.plant, u)
        r_y = simulate(residual_generator(toy_factors, YoulaParam.zero(1, 1)), np.hstack([u, y]))[:, 1:]
        np.testing.assert_allclose(r_y, 0.0, atol=1e-12)

    def test_misaligned_signals(self, toy_factors):
        param = YoulaParam.zero(1, 1)
        with pytest.raises(DimensionError, match="not aligned"):
            residuals_from_io(toy_factors, param, Signal(np.zeros((5, 1))), Signal(np.zeros((6, 1))))


class TestModes:

    @pytest.fixture
    def perturbed(self, robotino_factors):
        return FactorGains(0.9 * robotino_factors.F, 0.9 * robotino_factors.L)

    def test_compensators_are_inverse_pairs(self, robotino_factors, perturbed):
        comps = reparameterize_mode(robotino_factors, perturbed)
        assert comps.V_i0.n == robotino_factors.plant.n
        assert verify_bezout(comps.factors) < 1e-9

    def test_mode_residuals_reconstruct_io(self, robotino_factors, perturbed, rng):
        comps = reparameterize_mode(robotino_factors, perturbed)
        u = rng.standard_normal((100, 3))
        y = rng.standard_normal((100, 3))
        mode_param = YoulaParam.zero(3, 3, robotino_factors.plant.Ts)
        r_u_i, r_y_i = residuals_from_io(comps.factors, mode_param, Signal(u), Signal(y))
        u2, y2 = io_from_mode_residuals(robotino_factors, comps, r_u_i, r_y_i)
        np.testing.assert_allclose(u2.values, u, atol=1e-8)
        np.testing.assert_allclose(y2.values, y, atol=1e-8)

    def test_requires_unit_weights(self, toy_plant, toy_factors):
        weighted = build_bezout_factors(toy_plant, FactorGains(toy_factors.F, toy_factors.L, W=[[2.0]]))
        with pytest.raises(ConfigError, match="W = I"):
            reparameterize_mode(weighted, FactorGains(toy_factors.F, toy_factors.L))

    def test_mode_lookup(self, toy_factors):
        modes = ModeSet([toy_factors.gains, toy_factors.gains], [(10, 1), (20, 0)])
        assert [modes.mode_at(k) for k in (0, 9, 10, 19, 20, 100)] == [0, 0, 1, 1, 0, 0]

    def test_schedule_rejects_unknown_mode(self, toy_factors):
        with pytest.raises(ConfigError, match="only 1 modes"):
            ModeSet([toy_factors.gains], [(5, 1)])

    def test_random_schedule(self):
        rng = np.random.default_rng(3)
        schedule = random_dwell_schedule(3, 1000, 20, 50, rng)
        starts = [k for k, _ in schedule]
        assert schedule[0] == (0, 0)
        assert all(20 <= b - a <= 50 for a, b in zip(starts, starts[1:]))
        assert all(i != j for (_, i), (_, j) in zip(schedule, schedule[1:]))
        assert random_dwell_schedule(3, 1000, 20, 50, np.random.default_rng(3)) == schedule

    def test_noise_designed_mode_is_valid(self, toy_plant, toy_factors):
        F = lq_gain(toy_plant, 2.0 * np.eye(2), np.eye(1)).gain
        L = kalman_gain(toy_plant, NoiseSpec.isotropic(2, 1, 0.1)).gain
        comps = reparameterize_mode(toy_factors, FactorGains(F, L), index=1)
        assert comps.index == 1


def random_stable_plant(rng: np.random.Generator) -> StateSpaceModel:
    n = int(rng.integers(1, 9))
    m, p = int(rng.integers(1, 4)), int(rng.integers(1, 4))
    A = rng.standard_normal((n, n))
    A *= 0.9 / max(np.abs(np.linalg.eigvals(A)).max(), 1e-3)
    return StateSpaceModel.build(A, rng.standard_normal((n, m)), rng.standard_normal((p, n)),
                                 rng.standard_normal((p, m)))


@pytest.mark.slow
def test_bezout_identity_on_random_plants():
    rng = np.random.default_rng(100)
    worst = 0.0
    for _ in range(100):
        plant = random_stable_plant(rng)
        F = lq_gain(plant, np.eye(plant.n), np.eye(plant.inputs)).gain
        L = kalman_gain(plant, NoiseSpec.isotropic(plant.n, plant.outputs, 0.1)).gain
        worst = max(worst, verify_bezout(build_bezout_factors(plant, FactorGains(F, L))))
    assert worst < 1e-8
