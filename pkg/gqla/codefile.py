"""Persistence of codes: JSON code files and alist parity check matrices.

A code file is JSON text:

    {"n": 7, "k": 4, "w": ["1101", "1011", "0111"],
     "metadata": {"alpha": 2.5, "threshold_T": 30, ...}}

Rows of W are bit strings in row-major order. The alist form carries the full
H = [W | I] since decoders consume H.
"""

import json
import logging
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from gqla.core import CodeDimensions, GqlaError, ParityCheckMatrix
from gqla.platform.output import write_text_atomic

logger = logging.getLogger(__name__)


class CodeMetadata(BaseModel):
    """Provenance of a stored code; every field optional."""

    model_config = ConfigDict(populate_by_name=True, extra="allow")

    alpha: float | None = None
    n_errors: int | None = None
    threshold_t: int | None = Field(default=None, alias="threshold_T")
    init_density: float | None = None
    batch_size: int | None = None
    seed: int | None = None
    update_count: int | None = None
    optimizer: str | None = None


class _CodeDocument(BaseModel):
    n: int
    k: int
    w: list[str]
    metadata: CodeMetadata = Field(default_factory=CodeMetadata)


def _field_path(loc: tuple[int | str, ...]) -> str:
    path = ""
    for part in loc:
        path += f"[{part}]" if isinstance(part, int) else (f".{part}" if path else part)
    return path


def dumps_code(h: ParityCheckMatrix, metadata: CodeMetadata | None = None) -> str:
    """Serialize a code to JSON text."""
    document = _CodeDocument(
        n=h.dims.n,
        k=h.dims.k,
        w=["".join(str(int(b)) for b in row) for row in h.w],
        metadata=metadata or CodeMetadata(),
    )
    return (
        json.dumps(
            document.model_dump(by_alias=True, exclude_none=True),
            indent=2,
            sort_keys=True,
        )
        + "\n"
    )


def loads_code(text: str) -> tuple[ParityCheckMatrix, CodeMetadata]:
    """Parse JSON text into a code and its metadata."""
    if not text.strip():
        raise GqlaError("format", "Code file is empty.")
    try:
        raw: Any = json.loads(text)
    except json.JSONDecodeError as e:
        raise GqlaError(
            "format", f"Code file is not valid JSON at line {e.lineno}: {e.msg}."
        ) from e
    try:
        document = _CodeDocument.model_validate(raw)
    except ValidationError as e:
        fields = ", ".join(_field_path(err["loc"]) or "<root>" for err in e.errors())
        raise GqlaError("format", f"Code file has invalid fields: {fields}.") from e

    try:
        dims = CodeDimensions(document.n, document.k)
    except GqlaError as e:
        raise GqlaError("format", f"Fields n, k: {e.message}") from e
    if len(document.w) != dims.m:
        raise GqlaError(
            "format", f"Field w must have n-k={dims.m} rows, got {len(document.w)}."
        )
    rows: list[list[int]] = []
    for i, row in enumerate(document.w):
        if len(row) != dims.k or set(row) - {"0", "1"}:
            raise GqlaError(
                "format", f"Field w[{i}] must be {dims.k} characters of 0 or 1."
            )
        rows.append([int(c) for c in row])
    return ParityCheckMatrix(dims, np.array(rows, dtype=np.uint8)), document.metadata


def save_code(
    path: str, h: ParityCheckMatrix, metadata: CodeMetadata | None = None
) -> None:
    """Write a code file."""
    write_text_atomic(path, dumps_code(h, metadata))
    logger.debug("Saved code %s to %s.", h.dims, path)


def load_code(path: str) -> tuple[ParityCheckMatrix, CodeMetadata]:
    """Read a code file, or an alist file when the name ends in `.alist`."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise GqlaError("config", f"Cannot read code file {path}: {e}.") from e
    if path.endswith(".alist"):
        return from_alist(text), CodeMetadata()
    return loads_code(text)


def to_alist(h: ParityCheckMatrix) -> str:
    """Export the full H = [W | I] in alist form, zero padded."""
    full = h.full
    m, n = full.shape
    cols = [np.flatnonzero(full[:, j]) + 1 for j in range(n)]
    rows = [np.flatnonzero(full[i, :]) + 1 for i in range(m)]
    max_col = max(len(c) for c in cols)
    max_row = max(len(r) for r in rows)

    def padded(indices: np.ndarray, width: int) -> str:
        values = [int(v) for v in indices] + [0] * (width - len(indices))
        return " ".join(str(v) for v in values)

    lines = [
        f"{n} {m}",
        f"{max_col} {max_row}",
        " ".join(str(len(c)) for c in cols),
        " ".join(str(len(r)) for r in rows),
        *(padded(c, max_col) for c in cols),
        *(padded(r, max_row) for r in rows),
    ]
    return "\n".join(lines) + "\n"


def _ints(line_no: int, text: str) -> list[int]:
    try:
        return [int(v) for v in text.split()]
    except ValueError as e:
        raise GqlaError(
            "format", f"alist line {line_no}: expected integers, got '{text}'."
        ) from e


def from_alist(text: str) -> ParityCheckMatrix:
    """Import a standard-form H from alist text.

    The last n-k columns must form the identity block.
    """
    lines = [(i + 1, line) for i, line in enumerate(text.splitlines()) if line.strip()]
    if not lines:
        raise GqlaError("format", "alist file is empty.")
    if len(lines) < 4:
        raise GqlaError("format", f"alist header is incomplete at line {lines[-1][0]}.")

    header = _ints(*lines[0])
    if len(header) != 2:
        raise GqlaError("format", f"alist line {lines[0][0]}: expected 'n m'.")
    n, m = header
    if not 0 < m < n:
        raise GqlaError("format", f"alist line {lines[0][0]}: need 0 < m < n.")
    if len(lines) < 4 + n + m:
        raise GqlaError(
            "format",
            f"alist has {len(lines)} non-empty lines, expected {4 + n + m}.",
        )
    col_degrees = _ints(*lines[2])
    row_degrees = _ints(*lines[3])
    if len(col_degrees) != n:
        raise GqlaError("format", f"alist line {lines[2][0]}: expected {n} degrees.")
    if len(row_degrees) != m:
        raise GqlaError("format", f"alist line {lines[3][0]}: expected {m} degrees.")

    full = np.zeros((m, n), dtype=np.uint8)
    for j in range(n):
        line_no, line = lines[4 + j]
        indices = [v for v in _ints(line_no, line) if v != 0]
        if len(indices) != col_degrees[j] or any(not 1 <= v <= m for v in indices):
            raise GqlaError("format", f"alist line {line_no}: bad column {j + 1}.")
        full[[v - 1 for v in indices], j] = 1
    for i in range(m):
        line_no, line = lines[4 + n + i]
        indices = [v for v in _ints(line_no, line) if v != 0]
        if len(indices) != row_degrees[i] or any(not 1 <= v <= n for v in indices):
            raise GqlaError("format", f"alist line {line_no}: bad row {i + 1}.")
        if sorted(indices) != [int(v) + 1 for v in np.flatnonzero(full[i])]:
            raise GqlaError(
                "format",
                f"alist line {line_no}: row {i + 1} disagrees with the column lists.",
            )

    k = n - m
    if not np.array_equal(full[:, k:], np.eye(m, dtype=np.uint8)):
        raise GqlaError(
            "format", "alist matrix is not in standard form [W | I]: last n-k columns."
        )
    return ParityCheckMatrix(CodeDimensions(n, k), full[:, :k])


def save_alist(path: str, h: ParityCheckMatrix) -> None:
    """Write the alist export of a code."""
    write_text_atomic(path, to_alist(h))
