"""
Tabular scan results and the worker pool that fills them.

Rows use one long-format schema for every command, so a CSV written by any
subcommand reloads into the same ScanResult structure. Scan points are
dispatched to a thread pool and assembled in input order, which keeps output
independent of the worker count.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Iterable, Optional, Sequence, TypeVar, Union

from core.errors import LateralCPError

logger = logging.getLogger(__name__)

P = TypeVar("P")


@dataclass(frozen=True)
class ScanRow:
    """
    One computed value.

    Input columns that do not apply to a quantity are None (empty in CSV).
    """

    point: int
    method: str
    quantity: str
    value: Optional[float]
    error: Optional[float] = None
    k_rad_per_m: Optional[float] = None
    z_m: Optional[float] = None
    kz: Optional[float] = None
    x_m: Optional[float] = None
    tf_radius_m: Optional[float] = None
    flagged: bool = False
    message: str = ""
    failure: Optional[LateralCPError] = field(default=None, compare=False, repr=False)


COLUMNS = (
    "point",
    "k_rad_per_m",
    "z_m",
    "kz",
    "x_m",
    "tf_radius_m",
    "method",
    "quantity",
    "value",
    "error",
    "flagged",
    "message",
)
_FLOAT_COLUMNS = {"k_rad_per_m", "z_m", "kz", "x_m", "tf_radius_m", "value", "error"}


@dataclass
class ScanResult:
    """Ordered rows of a scan plus the metadata echoed into JSON output."""

    command: str
    rows: list[ScanRow] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def failures(self) -> list[LateralCPError]:
        return [row.failure for row in self.rows if row.failure is not None]

    @property
    def flagged(self) -> list[ScanRow]:
        return [row for row in self.rows if row.flagged]

    def values(self, quantity: str, method: Optional[str] = None, **inputs: float) -> list[Optional[float]]:
        """Values of one quantity (optionally one method and fixed inputs) in row order."""
        out = []
        for row in self.rows:
            if row.quantity != quantity or (method is not None and row.method != method):
                continue
            if any(getattr(row, name) != value for name, value in inputs.items()):
                continue
            out.append(row.value)
        return out

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in self.rows:
            writer.writerow([_format_cell(getattr(row, name)) for name in COLUMNS])
        return buffer.getvalue()

    def to_json(self) -> str:
        payload = {
            "command": self.command,
            "metadata": self.metadata,
            "columns": list(COLUMNS),
            "rows": [{name: _json_cell(getattr(row, name)) for name in COLUMNS} for row in self.rows],
        }
        return json.dumps(payload, indent=2, sort_keys=True, allow_nan=True) + "\n"

    def write(self, path: Optional[Union[str, Path]], fmt: str = "csv", stream=None) -> None:
        """Write CSV or JSON to a file, or to `stream` when path is None."""
        text = self.to_json() if fmt == "json" else self.to_csv()
        if path is None:
            stream.write(text)
            return
        Path(path).write_text(text, encoding="utf-8")
        logger.info(f"Wrote {len(self.rows)} rows to {path}")

    @classmethod
    def from_csv(cls, text: str, command: str = "") -> "ScanResult":
        reader = csv.DictReader(io.StringIO(text))
        if tuple(reader.fieldnames or ()) != COLUMNS:
            raise ValueError(f"unexpected CSV header: {reader.fieldnames}")
        rows = [_parse_row(record) for record in reader]
        return cls(command=command, rows=rows)

    @classmethod
    def from_json(cls, text: str) -> "ScanResult":
        payload = json.loads(text)
        rows = [ScanRow(**{name: record[name] for name in COLUMNS}) for record in payload["rows"]]
        return cls(command=payload["command"], rows=rows, metadata=payload["metadata"])


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _json_cell(value):
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


def _parse_row(record: dict[str, str]) -> ScanRow:
    kwargs: dict[str, Any] = {}
    for name in COLUMNS:
        raw = record[name]
        if name in _FLOAT_COLUMNS:
            kwargs[name] = float(raw) if raw != "" else None
        elif name == "point":
            kwargs[name] = int(raw)
        elif name == "flagged":
            kwargs[name] = raw == "true"
        else:
            kwargs[name] = raw
    return ScanRow(**kwargs)


def flag_inaccurate(row: ScanRow, rel_tol: float, abs_tol: float = 0.0) -> ScanRow:
    """Mark a row whose error estimate exceeds the requested tolerance."""
    if row.value is None or row.error is None or row.flagged:
        return row
    if row.error > rel_tol * abs(row.value) + abs_tol:
        return replace(row, flagged=True, message=row.message or f"error {row.error:.2e} above tolerance")
    return row


def error_row(point: int, method: str, quantity: str, exc: LateralCPError, **inputs) -> ScanRow:
    """Row recording a per-point failure; the scan carries on."""
    estimate = getattr(exc, "estimate", None)
    bound = getattr(exc, "error_bound", None)
    return ScanRow(
        point=point,
        method=method,
        quantity=quantity,
        value=estimate,
        error=bound,
        flagged=True,
        message=f"{type(exc).__name__}: {exc}",
        failure=exc,
        **inputs,
    )


def run_points(
    compute: Callable[[int, P], Sequence[ScanRow]],
    points: Iterable[P],
    threads: int = 1,
    label: str = "scan",
) -> list[ScanRow]:
    """
    Evaluate compute(index, point) for every point on a thread pool.

    An expected failure escaping compute becomes one flagged row for that
    point; the other points still run.

    Returns:
        Rows in input order
    """
    points = list(points)
    start = time.perf_counter()

    def safe(item: tuple[int, P]) -> Sequence[ScanRow]:
        index, point = item
        try:
            return compute(index, point)
        except LateralCPError as e:
            logger.warning(f"{label} point {index} failed: {e}")
            return [error_row(index, "", "", e)]

    if threads <= 1:
        results = [safe(item) for item in enumerate(points)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(safe, enumerate(points)))

    rows = [row for point_rows in results for row in point_rows]
    logger.info(f"{label}: {len(points)} points, {len(rows)} rows in {time.perf_counter() - start:.2f}s")
    return rows


def guarded(
    index: int,
    method: str,
    quantity: str,
    fn: Callable[[], Union[float, tuple[float, float]]],
    **inputs,
) -> ScanRow:
    """Evaluate one value into a row, turning expected failures into flagged rows."""
    try:
        result = fn()
    except LateralCPError as e:
        logger.warning(f"point {index} {method}/{quantity} failed: {e}")
        return error_row(index, method, quantity, e, **inputs)
    if isinstance(result, tuple):
        value, error = result
    else:
        value, error = result, None
    return ScanRow(
        point=index,
        method=method,
        quantity=quantity,
        value=float(value),
        error=None if error is None else float(error),
        **inputs,
    )
