#!/usr/bin/env python3
"""Reproduce every experiment into one output directory."""
import logging
import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.config import settings
from src.main import LOG_FORMAT
from src.scenario import EXPERIMENTS
from src.services import ExperimentExecutor, RunLogService


def main() -> int:
    """Run E1..E6, write per-experiment outputs and the run log."""
    logging.basicConfig(level=settings.log_level, format=LOG_FORMAT)
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else settings.output_path / "reproduce"
    print(f"Reproducing {', '.join(EXPERIMENTS)} into {out}...")

    run_log = RunLogService()
    results = ExperimentExecutor(run_log).execute_many(list(EXPERIMENTS), settings.seed, out)
    run_log.dump(out / "runs.json")

    failed = [key for key, (status, _, _) in results.items() if status.value != "success"]
    for record in sorted(run_log.get_all(), key=lambda r: r.name):
        print(f"{record.name}: {record.status.value} in {record.duration_seconds:.1f} s")
    if failed:
        print(f"Failed: {', '.join(failed)}")
        return 1
    print("All experiments reproduced successfully!")
    return 0


if __name__ == "__main__":
    sys.exit(main())
