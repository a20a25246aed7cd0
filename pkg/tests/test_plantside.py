"""Tests for the plant side: profiles, faults, reference, embedded computation and the χ² detector."""
import numpy as np
import pytest

from src.errors import ConfigError, DimensionError, SingularSystemError
from src.factory import FactorGains, ModeSet
from src.plantside import (
    Constant,
    FaultSpec,
    Gaussian,
    KalmanChi2Detector,
    PiecewiseReference,
    PlantProcess,
    PlantRuntime,
    ResidualFrame,
    Sine,
    VectorProfile,
    Window,
    embedded_compute,
    fd_chi2,
    plant_step,
)
from src.sscore import NoiseSpec, StateSpaceModel


class TestProfiles:

    def test_window_is_closed_open(self):
        w = Window(10, 20)
        assert [w.contains(k) for k in (9, 10, 19, 20)] == [False, True, True, False]
        assert Window(5).contains(10**6)

    def test_window_beyond_run(self):
        with pytest.raises(ConfigError, match="exceeds the run length"):
            Window(10, 300).check_within(200, "fault window")

    def test_window_order(self):
        with pytest.raises(ConfigError, match="precedes start"):
            Window(10, 5)

    def test_vector_profile_sums_components(self, rng):
        profile = VectorProfile(3, {0: (Constant(1.0), Sine(2.0, np.pi / 2)), 2: (Constant(-1.0),)})
        np.testing.assert_allclose(profile.sample(1, rng), [3.0, 0.0, -1.0])

    def test_profile_channel_range(self):
        with pytest.raises(DimensionError, match="channel 3"):
            VectorProfile(3, {3: (Constant(1.0),)})

    def test_gaussian_variance(self):
        with pytest.raises(ConfigError, match="non-negative"):
            Gaussian(0.0, -1.0)

    def test_gaussian_moments(self, rng):
        g = Gaussian(0.025, 1e-6)
        draws = np.array([g.sample(k, rng) for k in range(20000)])
        assert abs(draws.mean() - 0.025) < 5e-5
        np.testing.assert_allclose(draws.var(), 1e-6, rtol=0.05)


class TestFaultAndReference:

    def test_fault_silent_outside_window(self, toy_plant, rng):
        fault = FaultSpec.sensor_bias(toy_plant, 0, VectorProfile(1, {0: (Constant(0.5),)}), Window(3, 6))
        samples = [fault.sample(k, rng)[0] for k in range(8)]
        assert samples == [0.0, 0.0, 0.0, 0.5, 0.5, 0.5, 0.0, 0.0]

    def test_reference_holds_between_breakpoints(self):
        ref = PiecewiseReference(((200, [0.2, 0.1, 0.3]), (0, [0.1, 0.1, 0.2])))
        np.testing.assert_array_equal(ref.value(199), [0.1, 0.1, 0.2])
        np.testing.assert_array_equal(ref.value(200), [0.2, 0.1, 0.3])

    def test_reference_starts_at_zero(self):
        with pytest.raises(ConfigError, match="start at step 0"):
            PiecewiseReference(((5, [1.0]),))


class TestPlantProcess:

    def test_deterministic_for_seed(self, toy_plant):
        def run(seed):
            ss = np.random.SeedSequence(seed).spawn(2)
            proc = PlantProcess(toy_plant, NoiseSpec.isotropic(2, 1, 0.01), FaultSpec.none(toy_plant),
                                np.random.default_rng(ss[0]), np.random.default_rng(ss[1]))
            return np.array([plant_step(proc, [np.sin(k)], k) for k in range(50)])

        np.testing.assert_array_equal(run(5), run(5))
        assert not np.array_equal(run(5), run(6))

    def test_repeated_measure_sees_same_draw(self, toy_plant, rng):
        proc = PlantProcess(toy_plant, NoiseSpec.isotropic(2, 1, 0.01), FaultSpec.none(toy_plant), rng, rng)
        proc.begin_step(0)
        np.testing.assert_array_equal(proc.measure([1.0]), proc.measure([1.0]))


def _runtime(factors, mode_set=None, vbar0=0.5):
    Ts = factors.plant.Ts
    return PlantRuntime(
        factors,
        StateSpaceModel.identity(1, Ts),
        StateSpaceModel.static([[-0.15]], Ts),
        StateSpaceModel.identity(1, Ts),
        [vbar0],
        mode_set=mode_set,
    )


def _closed_loop(factors, runtime, steps=200, seed=11):
    model = factors.plant
    ss = np.random.SeedSequence(seed).spawn(3)
    proc = PlantProcess(model, NoiseSpec.isotropic(2, 1, 1e-4), FaultSpec.none(model),
                        np.random.default_rng(ss[0]), np.random.default_rng(ss[1]))
    w_rng = np.random.default_rng(ss[2])
    u_log, y_log, r_y_log, r_u_log = [], [], [], []
    for k in range(steps):
        proc.begin_step(k)
        y = proc.measure(np.zeros(1))
        w = 0.01 * w_rng.standard_normal(1)
        ev = runtime.compute(y, w, k)
        runtime.commit(ev)
        proc.advance(ev.u)
        u_log.append(ev.u)
        y_log.append(y)
        r_y_log.append(ev.r_y)
        r_u_log.append(ev.r_u)
    return np.array(u_log), np.array(y_log), np.array(r_y_log), np.array(r_u_log)


class TestEmbeddedComputation:

    def test_noise_free_residual_vanishes(self, toy_factors, rng):
        model = toy_factors.plant
        runtime = _runtime(toy_factors)
        proc = PlantProcess(model, NoiseSpec.silent(2, 1), FaultSpec.none(model), rng, rng)
        for k in range(100):
            proc.begin_step(k)
            u, frame = embedded_compute(runtime, proc.measure(np.zeros(1)), np.zeros(1), k)
            proc.advance(u)
            assert np.all(np.abs(frame.r_y) < 1e-12)
            np.testing.assert_allclose(frame.r_u, 0.0, atol=1e-15)

    def test_input_residual_is_mc_input(self, toy_factors):
        *_, r_u = _closed_loop(toy_factors, _runtime(toy_factors), steps=20)
        w_rng = np.random.default_rng(np.random.SeedSequence(11).spawn(3)[2])
        np.testing.assert_allclose(r_u[:, 0], 0.01 * w_rng.standard_normal(20), atol=1e-15)

    def test_fused_residual(self, toy_factors, rng):
        runtime = _runtime(toy_factors)
        ev = runtime.compute(np.array([0.3]), np.array([0.2]), 0)
        np.testing.assert_allclose(ev.r_yu, ev.r_y - 0.15 * ev.r_u)

    def test_pdd_mode_needs_psi(self, toy_factors):
        with pytest.raises(ConfigError, match="PDD mode"):
            _runtime(toy_factors).compute(np.array([0.1]), np.zeros(1), 0, pdd=True)

    def test_wrong_filter_shape(self, toy_factors):
        with pytest.raises(DimensionError, match="Q_r1 must be 1x1"):
            PlantRuntime(toy_factors, StateSpaceModel.identity(2), StateSpaceModel.identity(1),
                         StateSpaceModel.identity(1), [0.0])


class TestModeSwitching:

    @pytest.fixture
    def mode_set(self, toy_factors):
        perturbed = FactorGains(0.9 * toy_factors.F, 0.9 * toy_factors.L)
        return ModeSet([toy_factors.gains, perturbed], [(50, 1), (120, 0), (150, 1)])

    def test_switching_keeps_closed_loop_trajectories(self, toy_factors, mode_set):
        u0, y0, ry0, ru0 = _closed_loop(toy_factors, _runtime(toy_factors))
        u1, y1, ry1, ru1 = _closed_loop(toy_factors, _runtime(toy_factors, mode_set))
        np.testing.assert_allclose(u1, u0, atol=1e-9)
        np.testing.assert_allclose(y1, y0, atol=1e-9)
        np.testing.assert_allclose(ry1, ry0, atol=1e-9)
        np.testing.assert_allclose(ru1, ru0, atol=1e-9)

    def test_single_mode_set_is_base(self, toy_factors):
        single = ModeSet([toy_factors.gains])
        u0, y0, *_ = _closed_loop(toy_factors, _runtime(toy_factors))
        u1, y1, *_ = _closed_loop(toy_factors, _runtime(toy_factors, single))
        np.testing.assert_allclose(u1, u0, atol=1e-12)
        np.testing.assert_allclose(y1, y0, atol=1e-12)


class TestKalmanChi2:

    def test_threshold(self):
        det = KalmanChi2Detector(np.eye(3), alpha=0.01)
        np.testing.assert_allclose(det.threshold, 11.3449, atol=1e-4)

    def test_false_alarm_rate(self, rng):
        Sigma = np.array([[2.0, 0.3], [0.3, 0.5]])
        r = rng.multivariate_normal(np.zeros(2), Sigma, size=20000)
        frames = [ResidualFrame(k, r[k], np.zeros(1), r[k], np.zeros(1)) for k in range(len(r))]
        verdicts = fd_chi2(frames, Sigma, alpha=0.01)
        rate = np.mean([v.alarm for v in verdicts])
        assert abs(rate - 0.01) < 0.004

    def test_detects_bias(self):
        det = KalmanChi2Detector(1e-6 * np.eye(3))
        assert det.consume(0, [0.025, 0.0, 0.0]).alarm

    def test_singular_covariance(self):
        with pytest.raises(SingularSystemError, match="not positive definite"):
            KalmanChi2Detector(np.zeros((2, 2)))
