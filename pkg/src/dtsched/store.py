"""Append-only JSON-lines history of runs and tariffs.

Each record kind lives in its own file under the data directory
(``runs.jsonl``, ``tariffs.jsonl``).  Identifiers are shared across kinds and
strictly increasing.
"""

from __future__ import annotations

import errno
import json
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .errors import NotFound, StorageError, StorageFull
from .records import RunLog
from .tariff import PriceSchedule

FILES = {"run": "runs.jsonl", "tariff": "tariffs.jsonl"}


@dataclass(frozen=True)
class HistoryRecord:
    id: int
    created: str  # ISO-8601
    kind: str
    payload: dict


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class RunStore:
    """File-backed history.  One writer at a time; readers only see whole lines."""

    def __init__(self, data_dir, clock=_utc_now):
        self.root = Path(data_dir)
        self._clock = clock
        self._next_id = None

    def _path(self, kind: str) -> Path:
        try:
            return self.root / FILES[kind]
        except KeyError:
            raise ValueError(f"unknown record kind {kind!r}") from None

    def _scan(self, kind: str):
        path = self._path(kind)
        if not path.exists():
            return
        try:
            with path.open(encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, 1):
                    if not line.strip():
                        continue
                    try:
                        d = json.loads(line)
                    except json.JSONDecodeError as exc:
                        raise StorageError(f"{path}:{lineno}: corrupt record ({exc})") from None
                    yield HistoryRecord(d["id"], d["created"], d["kind"], d["payload"])
        except OSError as exc:
            raise StorageError(f"cannot read {path}: {exc}") from exc

    def _records(self, kind=None):
        kinds = [kind] if kind else list(FILES)
        for k in kinds:
            yield from self._scan(k)

    def append(self, kind: str, payload: dict) -> int:
        path = self._path(kind)
        if self._next_id is None:
            self._next_id = max((r.id for r in self._records()), default=0) + 1
        rec = {"id": self._next_id, "created": self._clock(), "kind": kind, "payload": payload}
        line = json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n"
        try:
            self.root.mkdir(parents=True, exist_ok=True)
            with path.open("a", encoding="utf-8") as fh:
                fh.write(line)
                fh.flush()
                os.fsync(fh.fileno())
        except OSError as exc:
            if exc.errno == errno.ENOSPC:
                raise StorageFull(str(exc)) from exc
            raise StorageError(f"cannot append to {path}: {exc}") from exc
        self._next_id += 1
        return rec["id"]

    def load(self, record_id: int) -> HistoryRecord:
        for r in self._records():
            if r.id == record_id:
                return r
        raise NotFound(record_id)

    def list(self, kind: str | None = None, start: str | None = None,
             end: str | None = None) -> list:
        """Ids of ``kind`` created within ``[start, end]`` (ISO strings, inclusive)."""
        ids = []
        for r in self._records(kind):
            created = datetime.fromisoformat(r.created)
            if start is not None and created < datetime.fromisoformat(start):
                continue
            if end is not None and created > datetime.fromisoformat(end):
                continue
            ids.append(r.id)
        return sorted(ids)

    def append_run(self, log: RunLog) -> int:
        return self.append("run", log.to_dict())

    def append_tariff(self, sched: PriceSchedule) -> int:
        return self.append("tariff", sched.to_dict())

    def load_run(self, record_id: int) -> RunLog:
        rec = self.load(record_id)
        if rec.kind != "run":
            raise NotFound(f"record {record_id} is a {rec.kind}, not a run")
        return RunLog.from_dict(rec.payload)
