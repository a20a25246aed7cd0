"""Run record bookkeeping service."""
import json
import threading
import uuid
from datetime import datetime, timezone
from pathlib import Path

from src.schemas.run import RunRecord, RunStatus


def generate_uuid() -> str:
    """Generate a UUID string."""
    return str(uuid.uuid4())


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class RunLogService:
    """Service for run record operations.

    Records live in memory and can be dumped to a JSON file. All methods
    are safe to call from experiment worker threads.
    """

    def __init__(self):
        """Initialize an empty record store."""
        self._records: dict[str, RunRecord] = {}
        self._lock = threading.Lock()

    def create(self, name: str, status: RunStatus = RunStatus.RUNNING) -> RunRecord:
        """Create a new run record."""
        record = RunRecord(id=generate_uuid(), name=name, status=status, started_at=_now())
        with self._lock:
            self._records[record.id] = record
        return record

    def update(
        self,
        run_id: str,
        status: RunStatus | None = None,
        summary: str | None = None,
        error_message: str | None = None,
    ) -> RunRecord | None:
        """Update a run record; a terminal status stamps completion time and duration."""
        with self._lock:
            record = self._records.get(run_id)
            if record is None:
                return None

            changes: dict = {}
            if status is not None:
                changes["status"] = status
                if status != RunStatus.RUNNING:
                    completed_at = _now()
                    started = datetime.fromisoformat(record.started_at)
                    completed = datetime.fromisoformat(completed_at)
                    changes["completed_at"] = completed_at
                    changes["duration_seconds"] = (completed - started).total_seconds()
            if summary is not None:
                changes["summary"] = summary
            if error_message is not None:
                changes["error_message"] = error_message

            record = record.model_copy(update=changes)
            self._records[run_id] = record
            return record

    def get_by_id(self, run_id: str) -> RunRecord | None:
        """Get a run record by ID."""
        with self._lock:
            return self._records.get(run_id)

    def get_all(self, status: RunStatus | None = None, name: str | None = None) -> list[RunRecord]:
        """Get all records, newest first, with optional filters."""
        with self._lock:
            records = list(self._records.values())
        if status is not None:
            records = [r for r in records if r.status == status]
        if name is not None:
            records = [r for r in records if r.name == name]
        return sorted(records, key=lambda r: r.started_at, reverse=True)

    def count(self) -> int:
        """Get total record count."""
        with self._lock:
            return len(self._records)

    def clear(self) -> None:
        with self._lock:
            self._records.clear()

    def dump(self, path: str | Path) -> Path:
        """Write every record, oldest first, as a JSON list."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        records = sorted(self.get_all(), key=lambda r: r.started_at)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump([r.model_dump(mode="json") for r in records], fh, indent=2)
            fh.write("\n")
        return path


# Global instance
run_log_service = RunLogService()
