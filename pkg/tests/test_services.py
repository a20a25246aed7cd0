"""Tests for the frame bus, detector scheduler, run records and experiment executor."""
import json
from dataclasses import dataclass

import numpy as np
import pytest

from src.errors import DivergenceError
from src.schemas.run import CheckResult, ExperimentSummary, RunStatus
from src.schemas.verdict import DetectorVerdict
from src.services import DetectorFamily, DetectorScheduler, ExperimentExecutor, FrameBus, RunLogService


@dataclass
class Frame:
    k: int
    e: np.ndarray


class Recorder:

    def __init__(self, name, fail=False):
        self.name = name
        self.fail = fail
        self.seen = []

    def consume(self, frame):
        if self.fail:
            raise RuntimeError("boom")
        self.seen.append(frame.k)
        return DetectorVerdict.judge(self.name, frame.k, float(frame.e.sum()), 1.0)


class TestFrameBus:

    def test_fan_out_in_order(self):
        bus = FrameBus()
        a, b = Recorder("a"), Recorder("b")
        bus.subscribe(a)
        bus.subscribe(b)
        out = bus.publish(Frame(3, np.ones(2)))
        assert [v.detector for _, v in out] == ["a", "b"]
        assert out[0][1].alarm
        assert bus.subscriber_count == 2

    def test_family_filter(self):
        bus = FrameBus()
        regular, pdd, any_ = Recorder("regular"), Recorder("pdd"), Recorder("any")
        bus.subscribe(regular, DetectorFamily.REGULAR)
        bus.subscribe(pdd, DetectorFamily.ADDITIVE)
        bus.subscribe(any_)
        bus.publish(Frame(0, np.zeros(1)), {DetectorFamily.REGULAR})
        bus.publish(Frame(1, np.zeros(1)), {DetectorFamily.ADDITIVE})
        assert (regular.seen, pdd.seen, any_.seen) == ([0], [1], [0, 1])
        assert bus.consumers(DetectorFamily.ADDITIVE) == [pdd]

    def test_frames_are_frozen(self):
        bus = FrameBus()
        frame = Frame(0, np.zeros(2))
        bus.publish(frame)
        with pytest.raises(ValueError):
            frame.e[0] = 1.0

    def test_unsubscribe(self):
        bus = FrameBus()
        bus.subscribe(Recorder("a"))
        bus.unsubscribe("a")
        assert bus.publish(Frame(0, np.zeros(1))) == []

    def test_consumer_failure_propagates(self, caplog):
        bus = FrameBus()
        bus.subscribe(Recorder("bad", fail=True))
        with pytest.raises(RuntimeError, match="boom"):
            bus.publish(Frame(7, np.zeros(1)))
        assert "Detector bad failed on frame 7" in caplog.text


class TestDetectorScheduler:

    def test_cycle(self):
        sched = DetectorScheduler(3, 2, 1)
        families = [sched.active(k).value for k in range(7)]
        assert families == ["regular"] * 3 + ["additive"] * 2 + ["multiplicative", "regular"]

    def test_resets_at_block_boundaries(self):
        sched = DetectorScheduler(3, 2, 1)
        assert sched.resets(3) == {DetectorFamily.ADDITIVE, DetectorFamily.MULTIPLICATIVE}
        assert sched.resets(5) == set()
        assert sched.resets(6) == {DetectorFamily.REGULAR}
        assert sched.resets(0) == set()

    def test_delayed_start(self):
        sched = DetectorScheduler(1, 1, 1, start=10)
        assert not any(sched.pdd(k) for k in range(10))
        assert sched.pdd(11)

    def test_invalid_dwell(self):
        with pytest.raises(ValueError, match="invalid detector dwell"):
            DetectorScheduler(0, 0, 0)


class TestRunLogService:

    def test_lifecycle(self):
        service = RunLogService()
        record = service.create("E1")
        assert record.status == RunStatus.RUNNING
        done = service.update(record.id, status=RunStatus.SUCCESS, summary="ok")
        assert done.completed_at is not None
        assert done.duration_seconds >= 0.0
        assert service.get_by_id(record.id).summary == "ok"
        assert service.update("missing", status=RunStatus.FAILURE) is None

    def test_filters_and_dump(self, tmp_path):
        service = RunLogService()
        a = service.create("E1")
        service.create("E2")
        service.update(a.id, status=RunStatus.FAILURE, error_message="x")
        assert [r.name for r in service.get_all(status=RunStatus.FAILURE)] == ["E1"]
        assert len(service.get_all(name="E2")) == 1
        path = service.dump(tmp_path / "runs.json")
        assert [r["name"] for r in json.loads(path.read_text(encoding="utf-8"))] == ["E1", "E2"]
        service.clear()
        assert service.count() == 0


def _summary(passed: bool) -> ExperimentSummary:
    check = CheckResult.near("gamma", 0.4 if passed else 0.5, 0.4, 1e-3)
    return ExperimentSummary(experiment="E9", title="stub", checks=[check])


class TestExperimentExecutor:

    @pytest.fixture
    def emitted(self, monkeypatch):
        calls = []
        monkeypatch.setattr("src.scenario.outputs.emit_outputs", lambda log, out, summary: calls.append(out))
        return calls

    def test_success(self, monkeypatch, emitted, tmp_path):
        monkeypatch.setattr("src.scenario.experiments.reproduce", lambda key, seed: (object(), _summary(True)))
        service = RunLogService()
        status, summary, error = ExperimentExecutor(service).execute("e1", 4, tmp_path)
        assert (status, error) == (RunStatus.SUCCESS, None)
        assert emitted == [tmp_path]
        assert service.get_all()[0].name == "E1"

    def test_failed_checks(self, monkeypatch, emitted):
        monkeypatch.setattr("src.scenario.experiments.reproduce", lambda key, seed: (object(), _summary(False)))
        status, summary, error = ExperimentExecutor(RunLogService()).execute("E2")
        assert status == RunStatus.FAILURE
        assert error == "failed checks: gamma"
        assert emitted == []

    def test_error_is_recorded(self, monkeypatch, emitted):
        def diverge(key, seed):
            raise DivergenceError("simulation diverged at step 3", step=3)

        monkeypatch.setattr("src.scenario.experiments.reproduce", diverge)
        service = RunLogService()
        status, summary, error = ExperimentExecutor(service).execute("E3")
        assert (status, summary) == (RunStatus.FAILURE, None)
        assert error.startswith("DivergenceError")
        assert service.get_all()[0].error_message == error

    @pytest.mark.parametrize("workers", [1, 3])
    def test_many_into_subdirectories(self, monkeypatch, emitted, tmp_path, workers):
        monkeypatch.setattr("src.scenario.experiments.reproduce", lambda key, seed: (object(), _summary(True)))
        results = ExperimentExecutor(RunLogService()).execute_many(["E1", "e2", "E3"], 0, tmp_path, workers)
        assert list(results) == ["E1", "E2", "E3"]
        assert sorted(emitted) == [tmp_path / "E1", tmp_path / "E2", tmp_path / "E3"]
