"""Bundled scenario presets built around the three-wheeled omnidirectional robot.

Presets are plain JSON-compatible trees so that they go through the same
validation as configuration files.
"""
import copy

from src.errors import ConfigError

A_F = [
    [0.428, 0.020, 0.0001],
    [0.026, 0.419, 0.0037],
    [0.284, -0.09, 0.2922],
]
B_F = [
    [-0.685e-4, 0.025e-4, 0.655e-4],
    [0.406e-4, -0.803e-4, 0.344e-4],
    [4.012e-4, 3.494e-4, 3.346e-4],
]
FEEDFORWARD_T = [
    [-4257.4943, 2463.2315, 662.2074],
    [10.9463, -4940.2157, 664.6608],
    [4284.4037, 2462.1782, 663.4313],
]
SAMPLE_TIME = 0.1
SINE_OMEGA = 0.2 * 3.141592653589793

NOMINAL_Q_R2_SCALE = -0.15
FTC_Q_R2_SCALE = -90.0


def _entry(numerator, denominator) -> dict:
    return {"numerator": list(numerator), "denominator": list(denominator)}


def q_r1_spec() -> dict:
    """diag 1/(z − 0.1)."""
    return {"diagonal": [_entry([1.0], [1.0, -0.1]) for _ in range(3)]}


def q_r2_spec(scale: float = NOMINAL_Q_R2_SCALE) -> dict:
    """scale·diag((z+0.4)/(z+0.1), (z+0.3)/(z+0.1), (z+0.2)/(z+0.1))."""
    zeros = (0.4, 0.3, 0.2)
    return {"diagonal": [_entry([1.0, z], [1.0, 0.1]) for z in zeros], "scale": scale}


def q_umc_spec() -> dict:
    """diag 10(z+0.1)/(z+0.4), 10(z+0.1)/(z+0.3), 10(z+0.1)/(z+0.2)."""
    poles = (0.4, 0.3, 0.2)
    return {"diagonal": [_entry([10.0, 1.0], [1.0, p]) for p in poles]}


def psi_spec() -> dict:
    """Ψ = [0.05·I₃, I₃] acting on [u; y]."""
    rows = []
    for i in range(3):
        row = [0.0] * 6
        row[i] = 0.05
        row[3 + i] = 1.0
        rows.append(row)
    return {"gain": rows}


def _sine(amplitude: float, offset: float | None = None) -> list[dict]:
    parts = [{"kind": "sine", "amplitude": amplitude, "omega": SINE_OMEGA}]
    if offset is not None:
        parts.append({"kind": "constant", "value": offset})
    return parts


def _input_attack_profile(offset: float | None = None) -> dict:
    return {"channels": {0: _sine(0.05, offset), 2: _sine(-0.05, offset)}}


def robotino_nominal() -> dict:
    """Attack-free, fault-free run of the robot velocity loop."""
    return {
        "name": "robotino.nominal",
        "architecture": "modified",
        "duration": 200.0,
        "plant": {"A": A_F, "B": B_F, "C": [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], "Ts": SAMPLE_TIME},
        "noise": {"process": 1e-6, "measurement": 1e-6},
        "gains": {"Qx": 1.0, "Ru": 1.0},
        "Q_r1": q_r1_spec(),
        "Q_r2": q_r2_spec(),
        "Q_uMC": q_umc_spec(),
        "Psi": psi_spec(),
        "reference": {
            "points": [
                {"time": 0.0, "value": [0.1, 0.1, 0.2]},
                {"time": 20.0, "value": [0.2, 0.1, 0.3]},
            ],
            "Q_v": {"gain": FEEDFORWARD_T},
        },
        "detectors": {"alpha": 0.01, "attack_chi2": True},
    }


def robotino_fault() -> dict:
    """Sensor bias on the first velocity channel, fault-tolerant swap of Q_r2 at 125 s."""
    cfg = robotino_nominal()
    cfg["name"] = "robotino.fault"
    cfg["fault"] = {
        "kind": "sensor_bias",
        "sensor": 0,
        "profile": {"channels": {0: [{"kind": "gaussian", "mean": 0.025, "variance": 1e-6}]}},
        "window": {"start": 50.0},
    }
    cfg["reconfigurations"] = [{"time": 125.0, "Q_r2": q_r2_spec(FTC_Q_R2_SCALE)}]
    return cfg


def robotino_attack() -> dict:
    """Sine input attack plus a biased residual attack, resilient swap at 100 s."""
    cfg = robotino_nominal()
    cfg["name"] = "robotino.attack"
    cfg["attacks"] = [{
        "kind": "additive",
        "window": {"start": 50.0, "end": 150.0},
        "a_uMC": _input_attack_profile(),
        "a_ryu": {"channels": {1: [{"kind": "gaussian", "mean": -0.025, "variance": 1e-10}]}},
    }]
    cfg["reconfigurations"] = [{"time": 100.0, "Q_r2": q_r2_spec(FTC_Q_R2_SCALE)}]
    return cfg


def robotino_switch() -> dict:
    """Attack switched on at 20 s and off at 170 s, watched by the LLR detector."""
    cfg = robotino_attack()
    cfg["name"] = "robotino.switch"
    cfg["attacks"][0]["window"] = {"start": 20.0, "end": 170.0}
    cfg["reconfigurations"] = []
    cfg["detectors"] = {
        "alpha": 0.01,
        "attack_chi2": True,
        "switch": {"s": 30, "gamma": 500, "L0": 1e-4},
    }
    return cfg


def robotino_traditional() -> dict:
    """Traditional configuration under a slight input attack only."""
    cfg = robotino_nominal()
    cfg["name"] = "robotino.traditional"
    cfg["architecture"] = "traditional"
    cfg["Q_youla"] = q_r1_spec()
    cfg.pop("Psi")
    cfg["attacks"] = [{"kind": "additive", "window": {"start": 50.0, "end": 150.0}, "a_uMC": _input_attack_profile()}]
    return cfg


def robotino_input_attack() -> dict:
    """Modified configuration under the same input-only attack."""
    cfg = robotino_traditional()
    cfg["name"] = "robotino.input_attack"
    cfg["architecture"] = "modified"
    cfg.pop("Q_youla")
    cfg["Psi"] = psi_spec()
    return cfg


def _scheduled(cfg: dict) -> dict:
    cfg["detectors"] = {
        "alpha": 0.01,
        "attack_chi2": True,
        "additive": True,
        "glr": {"N": 50, "far": 0.01},
        "schedule": {"regular": 15.0, "additive": 5.0, "multiplicative": 5.0},
    }
    return cfg


def robotino_covert() -> dict:
    """Covert input attack with an offset, masked on the residual channel."""
    cfg = _scheduled(robotino_nominal())
    cfg["name"] = "robotino.covert"
    cfg["attacks"] = [{"kind": "covert", "window": {"start": 75.0, "end": 175.0}, "a_uMC": _input_attack_profile(1.0)}]
    return cfg


def robotino_stealth() -> dict:
    """Feedback-stealth attack with Π_a = −I followed by a covert attack."""
    cfg = _scheduled(robotino_nominal())
    cfg["name"] = "robotino.stealth"
    cfg["attacks"] = [
        {
            "kind": "feedback_stealth",
            "window": {"start": 25.0, "end": 50.0},
            "unitary": "negative",
            "learning": {"start": 5.0, "end": 15.0},
        },
        {"kind": "covert", "window": {"start": 75.0, "end": 100.0}, "a_uMC": _input_attack_profile(1.0)},
    ]
    return cfg


PRESETS = {
    "robotino.nominal": robotino_nominal,
    "robotino.fault": robotino_fault,
    "robotino.attack": robotino_attack,
    "robotino.switch": robotino_switch,
    "robotino.traditional": robotino_traditional,
    "robotino.input_attack": robotino_input_attack,
    "robotino.covert": robotino_covert,
    "robotino.stealth": robotino_stealth,
}


def preset(name: str) -> dict:
    """Fresh copy of a bundled preset tree."""
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset '{name}'; available: {', '.join(sorted(PRESETS))}") from None
    return copy.deepcopy(factory())
