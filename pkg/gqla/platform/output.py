"""Result files: CSV tables, JSON documents and the run manifest.

Floats are written as locale independent scientific notation. JSON documents
are written through a temporary file in the target directory and moved into
place, so a reader never sees a partial manifest.
"""

import csv
import json
import os
import tempfile
from collections.abc import Iterable, Mapping, Sequence
from datetime import datetime, timezone
from typing import Any

from pydantic import BaseModel, Field

import gqla

CsvValue = float | int | str | bool | None


def format_value(value: CsvValue) -> str:
    """Render one cell; floats always in `.6e`."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6e}"
    return str(value)


def _ensure_parent(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def write_csv(
    path: str, fieldnames: Sequence[str], rows: Iterable[Mapping[str, CsvValue]]
) -> None:
    """Write rows under a header; missing keys become empty cells."""
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(
            f, fieldnames=list(fieldnames), extrasaction="ignore", lineterminator="\n"
        )
        writer.writeheader()
        for row in rows:
            writer.writerow({k: format_value(row.get(k)) for k in fieldnames})


def write_text_atomic(path: str, content: str) -> None:
    """Replace `path` with `content` in one rename."""
    _ensure_parent(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(content)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def write_json(path: str, document: Any) -> None:
    """Write a JSON document atomically with stable key order."""
    write_text_atomic(path, json.dumps(document, indent=2, sort_keys=True) + "\n")


def utc_now() -> str:
    """Current UTC time in ISO 8601 with second precision."""
    return (
        datetime.now(timezone.utc)
        .replace(microsecond=0)
        .isoformat()
        .replace("+00:00", "Z")
    )


class RunManifest(BaseModel):
    """Everything needed to rerun a command bit-exactly."""

    command: str
    config: dict[str, Any]
    seed: int
    version: str = gqla.__version__
    started_at: str = Field(default_factory=utc_now)
    finished_at: str | None = None
    outputs: list[str] = Field(default_factory=list)

    def write(self, path: str) -> None:
        """Persist the manifest atomically."""
        write_json(path, self.model_dump())

    def finish(self, path: str, outputs: Sequence[str]) -> None:
        """Stamp the end time, record outputs and persist again."""
        self.finished_at = utc_now()
        self.outputs = list(outputs)
        self.write(path)
