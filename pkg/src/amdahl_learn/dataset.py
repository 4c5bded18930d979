"""Benchmark measurement tables: configurations and their scores."""
from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DomainError, InputError
from .model_core import ResourceSchema, ResourceVector

SCORE_COLUMN = "score"


@dataclass(frozen=True, eq=False)
class Dataset:
    """Rows of (configuration, score); scores are higher-is-better and positive."""

    schema: ResourceSchema
    values: np.ndarray
    scores: np.ndarray
    source: str = ""

    def __post_init__(self):
        values = np.atleast_2d(np.asarray(self.values, dtype=float)).reshape(-1, self.schema.k)
        scores = np.asarray(self.scores, dtype=float).reshape(-1)
        if values.shape[0] != scores.shape[0]:
            raise DomainError(f"{values.shape[0]} configurations but {scores.shape[0]} scores")
        bad = np.argwhere(~(np.isfinite(values) & (values > 0)))
        if bad.size:
            i, j = map(int, bad[0])
            raise DomainError(f"row {i}: resource {self.schema.names[j]!r} must be positive, got {values[i, j]!r}")
        bad = np.flatnonzero(~(np.isfinite(scores) & (scores > 0)))
        if bad.size:
            raise DomainError(f"row {int(bad[0])}: score must be positive, got {scores[bad[0]]!r}")
        values.setflags(write=False)
        scores.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "scores", scores)

    @classmethod
    def from_rows(cls, rows: Sequence[tuple[ResourceVector, float]], source: str = "") -> "Dataset":
        if not rows:
            raise DomainError("dataset has no rows")
        schema = rows[0][0].schema
        if any(r.schema != schema for r, _ in rows):
            raise DomainError("rows use different schemas")
        return cls(schema, np.array([r.values for r, _ in rows]), np.array([s for _, s in rows]), source)

    @property
    def m(self) -> int:
        return int(self.scores.shape[0])

    def __len__(self):
        return self.m

    @property
    def rows(self) -> list[tuple[ResourceVector, float]]:
        return [(ResourceVector(self.schema, tuple(v)), float(s)) for v, s in zip(self.values, self.scores)]

    def subset(self, index) -> "Dataset":
        return Dataset(self.schema, self.values[index], self.scores[index], self.source)

    def with_scores(self, scores) -> "Dataset":
        return Dataset(self.schema, self.values, scores, self.source)

    def project(self, schema: ResourceSchema) -> "Dataset":
        """Reorder/select columns to match ``schema``."""
        if schema == self.schema:
            return self
        missing = [n for n in schema.names if n not in self.schema]
        if missing:
            raise DomainError(f"dataset lacks resource column(s): {', '.join(missing)}")
        cols = [self.schema.index(n) for n in schema.names]
        return Dataset(schema, self.values[:, cols], self.scores, self.source)


def _parse_float(text: str, what: str, path, line: int) -> float:
    text = text.strip()
    if not text:
        raise InputError(f"missing value for {what!r}", path, line)
    try:
        value = float(text)
    except ValueError:
        raise InputError(f"non-numeric value {text!r} for {what!r}", path, line) from None
    if not (math.isfinite(value) and value > 0):
        raise InputError(f"{what!r} must be positive, got {text!r}", path, line)
    return value


def _read_table(path, require_score: bool):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read file: {exc.strerror}", path) from None
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise InputError("empty file; expected a CSV header", path, 1) from None
    has_score = SCORE_COLUMN in header
    if require_score and not has_score:
        raise InputError(f"missing {SCORE_COLUMN!r} column", path, 1)
    if has_score and header[-1] != SCORE_COLUMN:
        raise InputError(f"{SCORE_COLUMN!r} must be the last column", path, 1)
    names = header[:-1] if has_score else header
    try:
        schema = ResourceSchema(tuple(names))
    except DomainError as exc:
        raise InputError(str(exc), path, 1) from None
    values, scores = [], []
    for line, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise InputError(f"expected {len(header)} fields, got {len(row)}", path, line)
        values.append([_parse_float(c, n, path, line) for c, n in zip(row, names)])
        if has_score:
            scores.append(_parse_float(row[-1], SCORE_COLUMN, path, line))
    if not values:
        raise InputError("no data rows", path)
    return schema, np.array(values), (np.array(scores) if has_score else None)


def load_dataset(path) -> Dataset:
    """Read a CSV whose header is the resource names followed by ``score``."""
    schema, values, scores = _read_table(path, require_score=True)
    return Dataset(schema, values, scores, source=str(path))


def load_configs(path, schema: ResourceSchema | None = None) -> tuple[ResourceSchema, np.ndarray]:
    """Read configurations (a trailing ``score`` column is allowed and ignored)."""
    file_schema, values, _ = _read_table(path, require_score=False)
    if schema is None:
        return file_schema, values
    missing = [n for n in schema.names if n not in file_schema]
    if missing:
        raise InputError(f"missing resource column(s): {', '.join(missing)}", path, 1)
    return schema, values[:, [file_schema.index(n) for n in schema.names]]


def format_float(x: float) -> str:
    """Locale-free shortest round-trip representation."""
    return repr(float(x))


def atomic_write(path, text: str):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(c) if isinstance(c, (float, np.floating)) else c for c in row])
    return buf.getvalue()


def dataset_csv(data: Dataset) -> str:
    return csv_text([*data.schema.names, SCORE_COLUMN],
                    [[*map(float, v), float(s)] for v, s in zip(data.values, data.scores)])


def write_dataset(path, data: Dataset):
    atomic_write(path, dataset_csv(data))
