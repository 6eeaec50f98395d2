"""Durable campaign storage: an append-only JSON-lines event log.

Every mutation is one fsync'd line; reload replays the log. A crash
between operations leaves at worst a partial trailing line, which reload
ignores, so the recovered state is always a prefix of the operation
sequence. Snapshot-style files (corpus, config) are written atomically via
temp-file rename.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Iterator


def atomic_write_json(path: Path, doc) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with tmp.open("w", encoding="utf-8") as fh:
        json.dump(doc, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


class EventLog:
    """Append-only event log with crash-safe appends and replay."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = self.path.open("a", encoding="utf-8")

    def append(self, event: dict) -> None:
        line = json.dumps(event, ensure_ascii=False, sort_keys=True)
        self._fh.write(line + "\n")
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def replay(self) -> Iterator[dict]:
        if not self.path.exists():
            return
        with self.path.open("r", encoding="utf-8") as fh:
            for line in fh:
                if not line.endswith("\n"):
                    break  # torn tail from a crash mid-append
                line = line.strip()
                if not line:
                    continue
                try:
                    yield json.loads(line)
                except json.JSONDecodeError:
                    break  # corrupt tail; stop at the last good prefix

    def close(self) -> None:
        self._fh.close()
