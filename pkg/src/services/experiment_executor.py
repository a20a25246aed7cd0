"""Experiment executor: runs reproductions, emits their outputs and tracks run records."""
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from src.config import settings
from src.errors import ResilienceLabError
from src.schemas.run import ExperimentSummary, RunStatus
from src.services.run_log_service import RunLogService, run_log_service

logger = logging.getLogger(__name__)


class ExperimentExecutor:
    """Service for executing experiment reproductions."""

    def __init__(self, run_log: RunLogService | None = None):
        """Initialize with the run record store (the global one by default)."""
        self.run_log = run_log if run_log is not None else run_log_service

    def execute(
        self,
        experiment: str,
        seed: int | None = None,
        out_dir: str | Path | None = None,
    ) -> tuple[RunStatus, ExperimentSummary | None, str | None]:
        """
        Reproduce one experiment.

        Args:
            experiment: Experiment id, E1..E6
            seed: Run seed; the settings seed when omitted
            out_dir: Emission directory; nothing is written when omitted

        Returns:
            Tuple of (status, summary, error_message)
        """
        # Deferred: the scenario package imports this services package.
        from src.scenario.experiments import reproduce
        from src.scenario.outputs import emit_outputs

        key = experiment.upper()
        record = self.run_log.create(key)
        status = RunStatus.FAILURE
        summary = None
        error_message = None

        try:
            log, summary = reproduce(key, seed)
            if out_dir is not None:
                emit_outputs(log, Path(out_dir), summary)
            if summary.passed:
                status = RunStatus.SUCCESS
            else:
                failed = [c.name for c in summary.checks if not c.passed]
                error_message = f"failed checks: {', '.join(failed)}"
                logger.warning(f"{key} finished with failed checks: {failed}")

        except ResilienceLabError as e:
            error_message = f"{type(e).__name__}: {e}"
            logger.error(f"{key} failed with error: {error_message}")

        except Exception as e:
            error_message = f"{type(e).__name__}: {e}"
            logger.error(f"{key} failed with unexpected error: {error_message}")

        finally:
            self.run_log.update(
                record.id,
                status=status,
                summary=summary.to_text() if summary is not None else None,
                error_message=error_message,
            )

        return status, summary, error_message

    def execute_many(
        self,
        experiments: list[str],
        seed: int | None = None,
        out_dir: str | Path | None = None,
        max_workers: int | None = None,
    ) -> dict[str, tuple[RunStatus, ExperimentSummary | None, str | None]]:
        """Reproduce several experiments, each into its own subdirectory of ``out_dir``.

        Each run owns its random streams, so results do not depend on the
        worker count.
        """
        workers = max_workers if max_workers is not None else settings.reproduce_workers
        keys = [e.upper() for e in experiments]

        def target(key: str):
            sub = Path(out_dir) / key if out_dir is not None else None
            return self.execute(key, seed, sub)

        if workers <= 1:
            return {key: target(key) for key in keys}
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {key: pool.submit(target, key) for key in keys}
        return {key: futures[key].result() for key in keys}


# Global instance
experiment_executor = ExperimentExecutor()
