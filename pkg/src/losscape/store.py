"""On-disk experiment store: one CSV plus one JSON sidecar per experiment.

The CSV is the canonical interchange format (grid only); the sidecar holds
name, creation time, metadata, and cached summary statistics for cheap
listing. Writes to one id are serialized and atomic (tmp + rename), so the
store survives restarts and concurrent readers.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
from datetime import datetime, timezone
from pathlib import Path
from urllib.parse import quote, unquote

from .analysis import summary_stats
from .csvio import Experiment, export_csv, parse_csv


class ExperimentNotFound(KeyError):
    pass


class ExperimentExists(ValueError):
    def __init__(self, exp_id: str):
        super().__init__(f"experiment id {exp_id!r} already exists")
        self.exp_id = exp_id


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


class ExperimentStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._master = threading.Lock()
        self._locks: dict[str, threading.Lock] = {}

    def _lock_for(self, exp_id: str) -> threading.Lock:
        with self._master:
            return self._locks.setdefault(exp_id, threading.Lock())

    def _paths(self, exp_id: str) -> tuple[Path, Path]:
        stem = quote(exp_id, safe="")
        return self.root / f"{stem}.csv", self.root / f"{stem}.json"

    def __contains__(self, exp_id: str) -> bool:
        return self._paths(exp_id)[1].exists()

    def ids(self) -> list[str]:
        return [entry["id"] for entry in self.list()]

    def put(self, exp: Experiment, overwrite: bool = False) -> Experiment:
        """Persist the experiment; fills created_at when unset. Raises
        ExperimentExists for a known id unless overwrite is set."""
        csv_path, meta_path = self._paths(exp.id)
        with self._lock_for(exp.id):
            if not overwrite and meta_path.exists():
                raise ExperimentExists(exp.id)
            if not exp.created_at:
                exp.created_at = _now_iso()
            sidecar = {
                "id": exp.id,
                "name": exp.name,
                "created_at": exp.created_at,
                "metadata": exp.metadata,
                "stats": summary_stats(exp.grid).as_dict(),
            }
            self._write_atomic(csv_path, export_csv([exp]))
            self._write_atomic(meta_path, json.dumps(sidecar, indent=1).encode("utf-8"))
        return exp

    def _write_atomic(self, path: Path, data: bytes) -> None:
        fd, tmp = tempfile.mkstemp(dir=self.root, prefix=".tmp-")
        try:
            with os.fdopen(fd, "wb") as f:
                f.write(data)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def get(self, exp_id: str) -> Experiment:
        csv_path, meta_path = self._paths(exp_id)
        with self._lock_for(exp_id):
            if not meta_path.exists():
                raise ExperimentNotFound(exp_id)
            sidecar = json.loads(meta_path.read_text("utf-8"))
            parsed = parse_csv(csv_path.read_bytes())
        if len(parsed) != 1 or parsed[0].id != exp_id:
            raise ValueError(f"store file for {exp_id!r} is corrupt")
        exp = parsed[0]
        exp.name = sidecar.get("name", exp_id)
        exp.metadata = dict(sidecar.get("metadata", {}))
        exp.created_at = sidecar.get("created_at", "")
        return exp

    def list(self) -> list[dict]:
        """Sidecar summaries (id, name, stats, metadata, created_at), ordered
        by creation time."""
        entries = []
        for meta_path in self.root.glob("*.json"):
            exp_id = unquote(meta_path.stem)
            with self._lock_for(exp_id):
                if not meta_path.exists():
                    continue
                sidecar = json.loads(meta_path.read_text("utf-8"))
            entries.append(
                {
                    "id": sidecar["id"],
                    "name": sidecar.get("name", sidecar["id"]),
                    "created_at": sidecar.get("created_at", ""),
                    "metadata": sidecar.get("metadata", {}),
                    "stats": sidecar.get("stats", {}),
                }
            )
        entries.sort(key=lambda e: (e["created_at"], e["id"]))
        return entries

    def delete(self, exp_id: str, missing_ok: bool = False) -> None:
        """Remove an experiment. State-idempotent; raises ExperimentNotFound
        for an unknown id unless missing_ok is set (the HTTP layer sets it)."""
        csv_path, meta_path = self._paths(exp_id)
        with self._lock_for(exp_id):
            if not meta_path.exists():
                if missing_ok:
                    return
                raise ExperimentNotFound(exp_id)
            meta_path.unlink(missing_ok=True)
            csv_path.unlink(missing_ok=True)
