"""Tests for attack channels, stealthy constructions and attacked-loop predictions."""
import numpy as np
import pytest

from src.attacks import (
    AdditiveAttack,
    AttackChannel,
    CovertAttack,
    Direction,
    FeedbackStealthAttack,
    FeedbackStealthDesign,
    MultiplicativeAttack,
    UnitaryChoice,
    channel_apply,
    covert_attack_gen,
    estimate_steady_stats,
    eta_a_signal,
    feedback_stealth_gen,
    moment_mismatch,
    predict_attacked_closed_loop,
    unitary_factor,
)
from src.errors import ConfigError
from src.plantside import Constant, Gaussian, Sine, VectorProfile, Window
from src.sscore import StateSpaceModel, simulate
from src.sscore.connect import vstack

ZETA = np.array([0.01, -0.02, 0.005])
SIGMA = np.array([[4e-6, 1e-6, 0.0], [1e-6, 2e-6, 0.0], [0.0, 0.0, 1e-6]])


def sine_profile(dim=3, amplitude=0.05):
    return VectorProfile(dim, {0: (Sine(amplitude, 0.2 * np.pi),), dim - 1: (Sine(-amplitude, 0.2 * np.pi),)})


class TestChannelApply:

    def test_additive_window(self, rng):
        spec = AdditiveAttack(Window(5, 10), VectorProfile(2, {1: (Constant(0.3),)}))
        np.testing.assert_array_equal(channel_apply(spec, Direction.TO_PLANT, [1.0, 1.0], 4, rng), [1.0, 1.0])
        np.testing.assert_allclose(channel_apply(spec, "toPlant", [1.0, 1.0], 5, rng), [1.0, 1.3])

    def test_to_mc_follows_architecture(self, rng):
        spec = AdditiveAttack(Window(0), VectorProfile.zero(1), a_y=VectorProfile(1, {0: (Constant(2.0),)}))
        np.testing.assert_allclose(channel_apply(spec, Direction.TO_MC, [1.0], 0, rng, "traditional"), [3.0])
        np.testing.assert_allclose(channel_apply(spec, Direction.TO_MC, [1.0], 0, rng, "modified"), [1.0])

    def test_static_multiplicative(self, rng):
        Pi = StateSpaceModel.static(np.diag([0.5, -0.2]))
        spec = MultiplicativeAttack(Window(0), Pi, VectorProfile.zero(1), VectorProfile(1, {0: (Constant(0.1),)}))
        np.testing.assert_allclose(channel_apply(spec, Direction.TO_PLANT, [2.0], 0, rng), [3.0])
        np.testing.assert_allclose(channel_apply(spec, Direction.TO_MC, [1.0], 0, rng), [0.9])

    def test_gaussian_profile_needs_generator(self, rng):
        spec = AdditiveAttack(Window(0), VectorProfile(2, {0: (Gaussian(0.0, 1.0),)}))
        with pytest.raises(ConfigError, match="random generator"):
            channel_apply(spec, Direction.TO_PLANT, np.zeros(2), 3)
        draws = [channel_apply(spec, Direction.TO_PLANT, np.zeros(2), k, rng)[0] for k in range(5)]
        assert len(set(draws)) == 5

    def test_deterministic_profile_without_generator(self):
        spec = AdditiveAttack(Window(0), VectorProfile(1, {0: (Constant(0.25),)}))
        np.testing.assert_allclose(channel_apply(spec, Direction.TO_PLANT, [1.0], 7), [1.25])

    def test_stateful_kinds_rejected(self, robotino):
        spec = CovertAttack(Window(0), sine_profile(), robotino.Q_r2)
        with pytest.raises(ConfigError, match="stateful"):
            channel_apply(spec, Direction.TO_PLANT, np.zeros(3), 0)


class TestSpecChecks:

    def test_additive_channel_per_architecture(self):
        spec = AdditiveAttack(Window(0), VectorProfile.zero(3), a_y=VectorProfile(3, {0: (Constant(1.0),)}))
        with pytest.raises(ConfigError, match="no channel in the modified"):
            spec.check("modified", 3, 3)

    def test_modified_needs_block_diagonal_pi(self):
        Pi = StateSpaceModel.static([[0.0, 0.1], [0.0, 0.0]])
        spec = MultiplicativeAttack(Window(0), Pi, VectorProfile.zero(1), VectorProfile.zero(1))
        spec.check("traditional", 1, 1)
        with pytest.raises(ConfigError, match="block diagonal"):
            spec.check("modified", 1, 1)

    def test_covert_targets_modified(self, robotino):
        spec = covert_attack_gen(robotino.mc, sine_profile(), Window(0, 10))
        with pytest.raises(ConfigError, match="modified configuration"):
            spec.check("traditional", 3, 3)

    def test_statistics_come_in_pairs(self):
        with pytest.raises(ConfigError, match="supplied together"):
            FeedbackStealthAttack(Window(10), zeta_hat=ZETA)

    def test_learning_before_attack(self):
        spec = FeedbackStealthAttack(Window(10, 20), learning=Window(0, 15))
        with pytest.raises(ConfigError, match="end before the attack"):
            spec.check("modified", 3, 3)


class TestCovert:

    def test_masking_cancels_eta(self, robotino):
        spec = covert_attack_gen(robotino.mc, sine_profile(), Window(20, 60))
        channel = AttackChannel([spec], "modified", np.random.default_rng(0))
        records = []
        for k in range(100):
            channel.begin_step(k)
            records.append(channel.commit(np.zeros(3), np.zeros(3), k))
        a_u = np.array([r.to_plant for r in records])
        a_r = np.array([r.to_mc for r in records])
        assert np.abs(a_u[20:60]).max() > 0.01
        np.testing.assert_allclose(eta_a_signal(robotino.Q_r2, a_u, a_r), 0.0, atol=1e-14)

    def test_prediction_reduces_to_open_image(self, robotino):
        analysis = predict_attacked_closed_loop(robotino.factors, robotino.mc, None)
        assert analysis.stable
        t = np.arange(150)
        a = 0.05 * np.column_stack([np.sin(0.1 * t), np.zeros(150), -np.sin(0.1 * t)])
        masked = np.hstack([a, -simulate(robotino.Q_r2, a)])
        image = vstack(robotino.factors.M, robotino.factors.N)
        np.testing.assert_allclose(analysis.predict(masked), simulate(image, a), atol=1e-8)


class TestFeedbackStealth:

    def test_unitary_factors(self, rng):
        np.testing.assert_array_equal(unitary_factor(UnitaryChoice.NEGATIVE, 2), -np.eye(2))
        U = unitary_factor(UnitaryChoice.RANDOM, 4, rng)
        np.testing.assert_allclose(U @ U.T, np.eye(4), atol=1e-12)
        with pytest.raises(ConfigError, match="generator"):
            unitary_factor(UnitaryChoice.RANDOM, 2)

    def test_rejects_non_orthogonal(self):
        with pytest.raises(ConfigError, match="orthogonal"):
            FeedbackStealthDesign(ZETA, SIGMA, 2.0 * np.eye(3))

    def test_operator_preserves_covariance(self, rng):
        design = FeedbackStealthDesign(ZETA, SIGMA, unitary_factor(UnitaryChoice.RANDOM, 3, rng))
        Pi_a = design.Pi_a
        np.testing.assert_allclose(Pi_a @ SIGMA @ Pi_a.T, SIGMA, rtol=0.0, atol=1e-12)

    def test_rejects_covariance_it_cannot_preserve(self):
        skew = np.eye(3) + np.array([[0.0, 0.5, 0.0], [-0.5, 0.0, 0.0], [0.0, 0.0, 0.0]])
        quarter_turn = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])
        with pytest.raises(ConfigError, match="preserve the residual covariance"):
            FeedbackStealthDesign(np.zeros(3), skew, quarter_turn)

    def test_negative_unitary_reflects_about_mean(self, rng):
        design = FeedbackStealthDesign(ZETA, SIGMA, -np.eye(3))
        frames = rng.multivariate_normal(ZETA, SIGMA, size=20)
        np.testing.assert_allclose(feedback_stealth_gen(design, frames), 2.0 * ZETA - frames, atol=1e-15)

    def test_moments_preserved(self, rng):
        design = FeedbackStealthDesign(ZETA, SIGMA, unitary_factor(UnitaryChoice.RANDOM, 3, rng))
        frames = rng.multivariate_normal(ZETA, SIGMA, size=20000)
        mean_err, cov_err = moment_mismatch(feedback_stealth_gen(design, frames), ZETA, SIGMA)
        assert mean_err < 1e-4
        assert cov_err < 0.05

    def test_steady_stats_need_frames(self):
        with pytest.raises(ConfigError, match="N >= 30"):
            estimate_steady_stats(np.zeros((10, 3)))

    def test_channel_learns_before_activation(self, rng):
        spec = FeedbackStealthAttack(Window(50, 80), learning=Window(0, 50))
        channel = AttackChannel([spec], "modified", rng)
        frames = np.random.default_rng(9).multivariate_normal(ZETA, SIGMA, size=80)
        out = []
        for k, r in enumerate(frames):
            channel.begin_step(k)
            out.append(channel.to_mc(np.zeros(3), r, k))
            channel.commit(np.zeros(3), r, k)
        out = np.array(out)
        np.testing.assert_array_equal(out[:50], frames[:50])
        learned = frames[:50].mean(axis=0)
        np.testing.assert_allclose(out[50:], 2.0 * learned - frames[50:], atol=1e-14)

    def test_prediction_needs_statistics(self, robotino):
        with pytest.raises(ConfigError, match="explicit statistics"):
            predict_attacked_closed_loop(robotino.factors, robotino.mc, FeedbackStealthAttack(Window(10)))


class TestTraditionalPrediction:

    def test_covert_has_no_traditional_model(self, robotino_factors, robotino):
        spec = CovertAttack(Window(0), sine_profile(), robotino.Q_r2)
        with pytest.raises(ConfigError):
            predict_attacked_closed_loop(robotino_factors, None, spec, "traditional")

    def test_additive_prediction_is_stable(self, robotino_factors):
        spec = AdditiveAttack(Window(0), sine_profile())
        analysis = predict_attacked_closed_loop(robotino_factors, None, spec, "traditional")
        assert analysis.stable
        assert analysis.attack_inputs == ["a_uMC", "a_y"]


@pytest.mark.slow
def test_additive_superposition_matches_prediction(robotino):
    """Attacked minus attack-free [u; y] is the predicted response to the channel perturbations."""
    from src.scenario import parse_config, preset, run_scenario

    gen = np.random.default_rng(404)
    tree = preset("robotino.input_attack")
    tree["attacks"] = []
    base = run_scenario(parse_config(tree), seed=11, steps=400)
    analysis = predict_attacked_closed_loop(robotino.factors, robotino.mc, None)
    for _ in range(10):
        channels = {int(c): [{"kind": "sine", "amplitude": float(gen.uniform(-0.05, 0.05)),
                              "omega": float(gen.uniform(0.01, 0.5))},
                             {"kind": "constant", "value": float(gen.uniform(-0.02, 0.02))}]
                    for c in gen.choice(3, size=2, replace=False)}
        start = float(gen.uniform(2.0, 10.0))
        tree["attacks"] = [{
            "kind": "additive",
            "window": {"start": start, "end": start + 20.0},
            "a_uMC": {"channels": channels},
            "a_ryu": {"channels": {int(gen.integers(3)): [{"kind": "constant", "value": 0.01}]}},
        }]
        attacked = run_scenario(parse_config(tree), seed=11, steps=400)
        delta = np.hstack([attacked.u - base.u, attacked.y - base.y])
        predicted = analysis.predict(np.hstack([attacked.a_plant, attacked.a_mc]))
        np.testing.assert_allclose(delta, predicted, rtol=0.0, atol=1e-8)
