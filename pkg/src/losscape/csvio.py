"""The 4-column CSV interchange contract.

Files carry one or more experiments keyed by the `id` column; `x`, `y` are
the slice coordinates and `loss` the value there. Export always writes the
header exactly as `id,x,y,loss`, floats as shortest round-trip decimals, and
non-finite losses as NaN / Infinity / -Infinity, so parse(export(e)) gives
the grids back bit for bit. Parse accepts the four columns in any order,
tolerates shuffled rows, keeps extra columns as per-experiment metadata, and
rejects anything that does not reassemble into complete rectangular grids.
The full grammar lives in docs/csv-format.md.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .landscape import LandscapeGrid

REQUIRED_COLUMNS = ("id", "x", "y", "loss")


class CsvFormatError(ValueError):
    """Malformed interchange CSV. `line` is 1-based (header is line 1)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        self.reason = message
        super().__init__(message if line is None else f"line {line}: {message}")


@dataclass
class Experiment:
    id: str
    grid: LandscapeGrid
    name: str = ""
    metadata: dict[str, str] = field(default_factory=dict)
    created_at: str = ""

    def __post_init__(self):
        if not self.id:
            raise ValueError("experiment id must be nonempty")
        if not self.name:
            self.name = self.id


def format_value(v: float) -> str:
    """Shortest decimal that round-trips the float64, with NaN / Infinity /
    -Infinity for the non-finite values."""
    if math.isnan(v):
        return "NaN"
    if math.isinf(v):
        return "Infinity" if v > 0 else "-Infinity"
    return repr(float(v))


def export_csv(experiments: list[Experiment]) -> bytes:
    """UTF-8 CSV: header `id,x,y,loss`, then one row per grid point, ordered
    by experiment, then y ascending, then x ascending."""
    if not experiments:
        raise ValueError("nothing to export: experiment list is empty")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REQUIRED_COLUMNS)
    for exp in experiments:
        grid = exp.grid
        for j, y in enumerate(grid.y_values):
            yrepr = format_value(y)
            for i, x in enumerate(grid.x_values):
                writer.writerow((exp.id, format_value(x), yrepr, format_value(grid.losses[j, i])))
    return buf.getvalue().encode("utf-8")


def _parse_float(raw: str, column: str, line: int, finite: bool) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise CsvFormatError(f"unparsable numeric {raw!r} in column '{column}'", line) from None
    if finite and not math.isfinite(value):
        raise CsvFormatError(f"column '{column}' must be finite, got {raw!r}", line)
    return value


def parse_csv(data: bytes | str) -> list[Experiment]:
    """Reassemble experiments from interchange CSV.

    Rows are grouped by id (output order = first appearance). For each id the
    distinct x and y values, sorted ascending, define the axes; every (x, y)
    pair must occur exactly once. Raises CsvFormatError on a missing required
    column, duplicate point, incomplete grid (naming the first missing pair),
    unparsable numbers, or an empty file.
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    reader = csv.reader(io.StringIO(text))

    header = None
    for row in reader:
        header = row
        break
    if header is None or all(not cell.strip() for cell in header):
        raise CsvFormatError("empty CSV: expected a header row")
    columns = [c.strip() for c in header]
    for name in REQUIRED_COLUMNS:
        if columns.count(name) > 1:
            raise CsvFormatError(f"duplicate column '{name}' in header", 1)
        if name not in columns:
            raise CsvFormatError(f"missing required column '{name}'", 1)
    col_index = {name: columns.index(name) for name in columns}
    extra_columns = [c for c in columns if c not in REQUIRED_COLUMNS]

    # per id: {(x, y) -> loss}, plus extra-column values
    points: dict[str, dict] = {}
    extras: dict[str, dict[str, list[str]]] = {}
    n_rows = 0
    for line, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(columns):
            raise CsvFormatError(
                f"expected {len(columns)} fields, got {len(row)}", line
            )
        n_rows += 1
        exp_id = row[col_index["id"]]
        if not exp_id:
            raise CsvFormatError("empty id", line)
        x = _parse_float(row[col_index["x"]], "x", line, finite=True)
        y = _parse_float(row[col_index["y"]], "y", line, finite=True)
        loss = _parse_float(row[col_index["loss"]], "loss", line, finite=False)
        bucket = points.setdefault(exp_id, {})
        if (x, y) in bucket:
            raise CsvFormatError(
                f"duplicate point (id={exp_id!r}, x={format_value(x)}, y={format_value(y)})", line
            )
        bucket[(x, y)] = loss
        if extra_columns:
            store = extras.setdefault(exp_id, {c: [] for c in extra_columns})
            for c in extra_columns:
                store[c].append(row[col_index[c]])
    if n_rows == 0:
        raise CsvFormatError("no data rows")

    experiments = []
    for exp_id, bucket in points.items():
        xs = sorted({x for x, _ in bucket})
        ys = sorted({y for _, y in bucket})
        if len(bucket) != len(xs) * len(ys):
            for y in ys:
                for x in xs:
                    if (x, y) not in bucket:
                        raise CsvFormatError(
                            f"incomplete grid for id {exp_id!r}: missing point "
                            f"(x={format_value(x)}, y={format_value(y)})"
                        )
        losses = np.empty((len(ys), len(xs)))
        xi = {x: i for i, x in enumerate(xs)}
        yi = {y: j for j, y in enumerate(ys)}
        for (x, y), loss in bucket.items():
            losses[yi[y], xi[x]] = loss
        grid = LandscapeGrid(x_values=np.array(xs), y_values=np.array(ys), losses=losses)

        metadata: dict[str, str] = {}
        name = ""
        warnings = []
        for column, values in extras.get(exp_id, {}).items():
            unique = set(values)
            if len(unique) > 1:
                warnings.append(f"extra column '{column}' varies within id {exp_id!r}; kept first value")
            value = values[0]
            if column == "name":
                name = value
            else:
                metadata[column] = value
        if warnings:
            _append_warnings(metadata, warnings)
        experiments.append(Experiment(id=exp_id, grid=grid, name=name, metadata=metadata))

    # differing x-y planes across experiments are accepted (custom data may
    # legitimately differ) but recorded, since side-by-side comparison of
    # unequal planes is easy to misread
    spans = {
        (e.grid.x_values[0], e.grid.x_values[-1], e.grid.y_values[0], e.grid.y_values[-1])
        for e in experiments
    }
    if len(spans) > 1:
        for exp in experiments:
            _append_warnings(exp.metadata, ["experiments in this file use differing x-y ranges"])
    return experiments


def _append_warnings(metadata: dict[str, str], warnings: list[str]) -> None:
    existing = metadata.get("warnings", "")
    joined = "; ".join(warnings)
    metadata["warnings"] = f"{existing}; {joined}" if existing else joined
