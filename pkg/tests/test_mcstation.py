"""Tests for the MC-station: control law, post-filter, detectors and performance indices."""
from dataclasses import replace

import numpy as np
import pytest
from scipy import stats

from src.errors import ConfigError, SingularSystemError
from src.mcstation import (
    AdditiveStealthChi2,
    AttackResidualChi2,
    GlrDetector,
    McObservation,
    McStation,
    PddConfig,
    SwitchingLlr,
    attack_postfilter,
    build_switch_detector,
    calibrate_glr_threshold,
    design_attack_postfilter,
    estimate_pdd_covariance,
    glr_statistic,
    inverse_sqrt,
    llr_branch_values,
    llr_projection_statistic,
    llr_statistic,
    llr_threshold,
    mc_control,
    reconfigure,
    resilient_performance_check,
    sliding_glr,
    whiteness_deviation,
)
from src.mcstation.detectors import llr_branch, llr_value
from src.scenario.builders import build_system
from src.scenario.presets import FEEDFORWARD_T, q_r2_spec
from src.schemas.scenario import SystemSpec
from src.schemas.verdict import Polarity
from src.sscore import StateSpaceModel

BOUND_L_L = 0.1433
BOUND_L_U = 1.0474

# seeded window norms spanning all three LLR branches, plus both boundaries
WINDOW_NORMS = np.concatenate([
    [BOUND_L_L, BOUND_L_U],
    np.exp(np.random.default_rng(93).uniform(np.log(1e-3), np.log(5.0), 98)),
])


def observation(k, e, r_pdd=None):
    e = np.asarray(e, dtype=float)
    zero = np.zeros_like(e)
    return McObservation(k=k, r_yu_a=e, v=zero, q_r2_v=zero, e=e, r_pdd=r_pdd, u_mc=zero)


class TestControlLaw:

    def test_reference_step_feedthrough(self, robotino):
        station = McStation(robotino.mc)
        for k in range(200):
            np.testing.assert_allclose(mc_control(station, np.zeros(3), k), 0.0, atol=1e-15)
        v = np.asarray(FEEDFORWARD_T) @ np.array([0.1, 0.0, 0.1])
        # static part of −Q_uMC Q_r2 is 1.5
        np.testing.assert_allclose(mc_control(station, np.zeros(3), 200), 2.5 * v, rtol=1e-12)

    def test_residual_path(self, robotino):
        station = McStation(robotino.mc)
        np.testing.assert_allclose(mc_control(station, np.array([1.0, 0.0, 0.0]), 0), [10.0, 0.0, 0.0])

    def test_preview_does_not_commit(self, robotino):
        station = McStation(robotino.mc)
        first = station.evaluate(np.ones(3), 0).u_mc
        np.testing.assert_array_equal(station.evaluate(np.ones(3), 0).u_mc, first)

    def test_singular_loop_rejected(self, robotino):
        with pytest.raises(SingularSystemError, match="I - Q_uMC·Q_r2"):
            replace(robotino.mc, Q_r2=StateSpaceModel.static(0.1 * np.eye(3)))


class TestPostfilter:

    def test_inverse_sqrt(self):
        Sigma = np.array([[2.0, 0.5], [0.5, 1.0]])
        W = inverse_sqrt(Sigma)
        np.testing.assert_allclose(W @ Sigma @ W, np.eye(2), atol=1e-12)

    def test_inverse_sqrt_singular(self):
        with pytest.raises(SingularSystemError, match="not positive definite"):
            inverse_sqrt(np.diag([1.0, 0.0]))

    def test_static_filter(self):
        Sigma = np.diag([1e-6, 4e-6])
        R = design_attack_postfilter(StateSpaceModel.static(2.0 * np.eye(2)), Sigma)
        np.testing.assert_allclose(R.D @ (4.0 * Sigma) @ R.D.T, np.eye(2), rtol=1e-10)

    @pytest.mark.slow
    def test_robot_filter_whitens(self, robotino, rng):
        deviation = whiteness_deviation(robotino.mc.R, robotino.Q_r1, robotino.Sigma_ry, 20000, rng)
        assert deviation < 0.05

    def test_attack_postfilter_static_part(self, robotino):
        Rbar = attack_postfilter(robotino.mc.R, robotino.Q_r2, robotino.Q_uMC)
        np.testing.assert_allclose(Rbar.D, 2.5 * robotino.mc.R.D, rtol=1e-12)


class TestAttackChi2:

    def test_threshold(self, robotino):
        det = AttackResidualChi2(robotino.mc.Rbar, 0.01)
        np.testing.assert_allclose(det.threshold, 11.3450, atol=1e-4)

    def test_large_residual_alarms(self, robotino):
        det = AttackResidualChi2(robotino.mc.Rbar, 0.01)
        assert det.consume(observation(0, [0.05, 0.0, 0.0])).alarm
        assert not AttackResidualChi2(robotino.mc.Rbar, 0.01).consume(observation(0, np.zeros(3))).alarm

    def test_reset_clears_filter_state(self, robotino):
        det = AttackResidualChi2(robotino.mc.Rbar, 0.01)
        for k in range(20):
            det.consume(observation(k, np.full(3, 0.05)))
        det.reset()
        fresh = AttackResidualChi2(robotino.mc.Rbar, 0.01)
        for k in range(20, 25):
            assert det.consume(observation(k, np.zeros(3))).statistic == fresh.consume(observation(k, np.zeros(3))).statistic
        assert fresh.consume(observation(25, np.zeros(3))).statistic == 0.0


class TestSwitchLlr:

    @pytest.fixture(scope="class")
    def switch(self, robotino):
        return build_switch_detector(robotino.mc.Rbar, 30, 500, 1e-4, BOUND_L_L, BOUND_L_U)

    def test_branch_constants(self):
        values = llr_branch_values(np.sqrt(129.15), BOUND_L_L, BOUND_L_U)
        np.testing.assert_allclose(values["attack_free"], 53.2207, atol=1e-3)
        np.testing.assert_allclose(values["ambiguous"], -9.7366, atol=1e-3)
        np.testing.assert_allclose(values["attacked"], -62.9573, atol=1e-3)

    def test_threshold_quantile(self, switch):
        assert switch.dof == 93
        th = llr_threshold(switch, 0.01)
        np.testing.assert_allclose(th.quantile, stats.ncx2.ppf(0.99, 93, BOUND_L_U**2), rtol=1e-6)
        assert abs(th.quantile - 129.15) < 0.5
        assert th.active_branch == "attacked"

    @pytest.mark.parametrize("case", range(len(WINDOW_NORMS)))
    def test_branches_match_projection(self, case):
        gen = np.random.default_rng(case)
        r = gen.standard_normal(int(gen.integers(1, 94)))
        norm = WINDOW_NORMS[case]
        r *= norm / np.linalg.norm(r)
        J, _ = llr_value(float(np.linalg.norm(r)), BOUND_L_L, BOUND_L_U)
        np.testing.assert_allclose(llr_projection_statistic(r, BOUND_L_L, BOUND_L_U), J, rtol=1e-9, atol=1e-12)

    def test_window_norms_cover_every_branch(self):
        branches = {llr_branch(n, BOUND_L_L, BOUND_L_U) for n in WINDOW_NORMS}
        assert branches == {"attack_free", "ambiguous", "attacked"}

    def test_statistic_polarity(self, switch):
        big = np.full(switch.dof, 10.0)
        verdict = llr_statistic(switch, big, k0=4)
        assert verdict.polarity == Polarity.BELOW
        assert verdict.alarm and verdict.k0 == 4 and verdict.branch == "attacked"
        assert not llr_statistic(switch, np.zeros(switch.dof)).alarm

    def test_window_fill(self, robotino, switch):
        det = SwitchingLlr(robotino.mc.Rbar, switch)
        verdicts = [det.consume(observation(k, np.zeros(3))) for k in range(31)]
        assert all(v is None for v in verdicts[:30])
        assert verdicts[30].k0 == 0 and not verdicts[30].alarm

    def test_reset_matches_fresh_detector(self, robotino, switch, rng):
        det = SwitchingLlr(robotino.mc.Rbar, switch)
        for k in range(40):
            det.consume(observation(k, np.full(3, 0.05)))
        det.reset()
        fresh = SwitchingLlr(robotino.mc.Rbar, switch)
        frames = rng.standard_normal((31, 3)) * 1e-3
        ours = [det.consume(observation(40 + k, e)) for k, e in enumerate(frames)]
        theirs = [fresh.consume(observation(40 + k, e)) for k, e in enumerate(frames)]
        assert all(v is None for v in ours[:30])
        assert ours[30].statistic == theirs[30].statistic
        assert ours[30].k0 == theirs[30].k0 == 40

    def test_short_horizon_rejected(self, robotino):
        with pytest.raises(ConfigError, match="truncation invalid"):
            build_switch_detector(robotino.mc.Rbar, 30, 1, 1e-4)

    def test_derived_bounds_ordered(self, robotino):
        cfg = build_switch_detector(robotino.mc.Rbar, 10, 500, 1e-4)
        assert 0.0 < cfg.L_l <= cfg.L_u
        np.testing.assert_allclose(cfg.L_u / cfg.L_l, np.sqrt(cfg.sigma_max / cfg.sigma_min))


class TestGlr:

    def test_zero_when_sample_covariance_is_nominal(self):
        a, b = np.sqrt(2.0), np.sqrt(8.0)
        W = np.array([[a, 0.0], [-a, 0.0], [0.0, b], [0.0, -b]])
        np.testing.assert_allclose(glr_statistic(W, np.diag([1.0, 4.0])), 0.0, atol=1e-12)

    def test_sliding_matches_direct(self, rng):
        R = rng.standard_normal((80, 3))
        Sigma = np.diag([1.0, 2.0, 0.5])
        sliding = sliding_glr(R, Sigma, 20)
        assert sliding.shape == (61,)
        for i in (0, 17, 60):
            np.testing.assert_allclose(sliding[i], glr_statistic(R[i:i + 20], Sigma), rtol=1e-9)

    @pytest.mark.slow
    def test_calibrated_false_alarm_and_detection(self):
        rng = np.random.default_rng(2024)
        Sigma = np.eye(3)
        threshold = calibrate_glr_threshold([rng.standard_normal((60000, 3))], Sigma, 50, 0.01, max_windows=50000)
        nominal = sliding_glr(rng.standard_normal((60000, 3)), Sigma, 50)
        assert np.mean(nominal > threshold) < 0.03
        attacked = sliding_glr(np.sqrt(3.0) * rng.standard_normal((5000, 3)), Sigma, 50)
        assert np.mean(attacked > threshold) > 0.95

    def test_detector_needs_threshold(self, robotino):
        cfg = PddConfig(robotino.Psi, robotino.reference.Q_v, np.eye(3))
        with pytest.raises(ConfigError, match="not calibrated"):
            GlrDetector(cfg)

    def test_detector_window(self, robotino, rng):
        cfg = PddConfig(robotino.Psi, robotino.reference.Q_v, np.eye(3), N=10, glr_threshold=50.0)
        det = GlrDetector(cfg)
        out = [det.consume(observation(k, np.zeros(3), rng.standard_normal(3))) for k in range(12)]
        assert all(v is None for v in out[:9])
        assert [v.k0 for v in out[9:]] == [0, 1, 2]
        det.reset()
        assert det.consume(observation(12, np.zeros(3), rng.standard_normal(3))) is None

    def test_window_must_exceed_dimension(self, robotino):
        with pytest.raises(ConfigError, match="must exceed"):
            PddConfig(robotino.Psi, robotino.reference.Q_v, np.eye(3), N=3)


class TestAdditiveStealth:

    def test_covariance_needs_samples(self):
        with pytest.raises(ConfigError, match="at least 30 samples"):
            estimate_pdd_covariance(np.ones((20, 3)))

    def test_false_alarm_and_bias(self, robotino, rng):
        Sigma = np.diag([1e-4, 2e-4, 3e-4])
        cfg = PddConfig(robotino.Psi, robotino.reference.Q_v, Sigma)
        det = AdditiveStealthChi2(cfg, 0.01)
        r = rng.standard_normal((20000, 3)) * np.sqrt(np.diag(Sigma))
        rate = np.mean([det.consume(observation(k, np.zeros(3), r[k])).alarm for k in range(len(r))])
        assert abs(rate - 0.01) < 0.004
        assert det.consume(observation(0, np.zeros(3), np.array([0.1, 0.0, 0.0]))).alarm


class TestPerformance:

    def test_nominal_attack_gain(self, robotino):
        report = resilient_performance_check(robotino.factors, robotino.mc, target_theta_a=0.5)
        np.testing.assert_allclose(report.gamma_theta_a, 0.4, rtol=1e-6)
        assert report.pass_theta_a
        assert report.gamma_ry > 0.0

    def test_fault_tolerant_swap(self, robotino):
        Q_r2 = build_system(SystemSpec.model_validate(q_r2_spec(-90.0)), robotino.Ts, "Q_r2")
        swapped = reconfigure(robotino.mc, new_Q_r2=Q_r2)
        report = resilient_performance_check(robotino.factors, swapped)
        np.testing.assert_allclose(report.gamma_theta_a, 1.0 / 901.0, rtol=1e-6)
        np.testing.assert_allclose(swapped.Rbar.D, 901.0 * swapped.R.D, rtol=1e-10)
        assert swapped.Q_r1 is robotino.mc.Q_r1

    def test_psi_margin_reported(self, robotino):
        margin = robotino.psi_margin
        assert set(margin) == {"gamma_psi", "gamma_r1", "ratio"}
        assert margin["gamma_r1"] > 0.0
        np.testing.assert_allclose(margin["ratio"], margin["gamma_psi"] / margin["gamma_r1"])
