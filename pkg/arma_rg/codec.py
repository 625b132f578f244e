"""Reading and writing arma_rg artifacts.

Series CSV:
    header  n,x
    rows    consecutive integer index from 0, observation as a shortest round-trip float

Table CSV (orbits, reports, experiments): mandatory header row, '.' decimal separator, '\\n'
line endings, empty cells for absent values.

JSON: one object per file, keys sorted, numpy scalars and arrays converted to plain numbers and
lists. Series JSON holds {"tau", "seed", "scheme", "values"}.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Any

import numpy as np

from .const import Scheme
from .exceptions import CodecError
from .models import RgOrbit, TimeSeries

SERIES_HEADER = ("n", "x")


def _to_plain(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, tuple):
        return list(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def _format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float | np.floating):
        return repr(float(value))
    return str(value)


def encode_json(payload: Mapping[str, Any]) -> str:
    """Serialize payload as indented JSON with sorted keys and a trailing newline."""
    return json.dumps(payload, indent=2, sort_keys=True, default=_to_plain) + "\n"


def decode_json(text: str) -> dict[str, Any]:
    """Parse a JSON object.

    Raises:
        CodecError: If the text is not valid JSON or not an object.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise CodecError(f"invalid JSON at line {err.lineno}: {err.msg}") from err
    if not isinstance(data, dict):
        raise CodecError(f"expected a JSON object, got {type(data).__name__}")
    return data


def encode_table(rows: Iterable[Mapping[str, Any]], columns: Sequence[str]) -> str:
    """CSV table with a header row; missing keys become empty cells."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format_cell(row.get(column)) for column in columns])
    return buffer.getvalue()


def encode_series_csv(series: TimeSeries) -> str:
    """Series as "n,x" CSV."""
    return encode_table(
        ({"n": i, "x": float(x)} for i, x in enumerate(series.values)), SERIES_HEADER
    )


def decode_series_csv(
    text: str, tau: float, seed: int | None = None, scheme: Scheme = Scheme.EXTERNAL
) -> TimeSeries:
    """Parse an "n,x" CSV into a TimeSeries.

    Raises:
        CodecError: If the header is missing, an index is out of sequence or a value is not a
            finite number.
    """
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(cell.strip() for cell in header) != SERIES_HEADER:
        raise CodecError(f"series CSV must start with the header 'n,x', got {header}")
    values = []
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 2:
            raise CodecError(f"line {line_no}: expected 2 cells, got {len(row)}")
        try:
            index, value = int(row[0]), float(row[1])
        except ValueError as err:
            raise CodecError(f"line {line_no}: {err}") from err
        if index != len(values):
            raise CodecError(f"line {line_no}: expected index {len(values)}, got {index}")
        if not math.isfinite(value):
            raise CodecError(f"line {line_no}: non-finite observation {row[1]}")
        values.append(value)
    if not values:
        raise CodecError("series CSV has no observations")
    return TimeSeries(tau=tau, values=np.asarray(values), seed=seed, scheme=scheme)


def series_to_dict(series: TimeSeries) -> dict[str, Any]:
    return {
        "tau": series.tau,
        "seed": series.seed,
        "scheme": str(series.scheme),
        "values": series.values.tolist(),
    }


def series_from_dict(data: Mapping[str, Any]) -> TimeSeries:
    """Inverse of series_to_dict.

    Raises:
        CodecError: If a field is missing or malformed.
    """
    try:
        return TimeSeries(
            tau=float(data["tau"]),
            values=np.asarray(data["values"], dtype=float),
            seed=data.get("seed"),
            scheme=Scheme(data.get("scheme", Scheme.EXTERNAL)),
        )
    except (KeyError, TypeError, ValueError) as err:
        raise CodecError(f"malformed series object: {err}") from err


def read_series(path: Path, tau: float | None = None) -> TimeSeries:
    """Load a series from .csv (tau required) or .json.

    Raises:
        CodecError: If the file cannot be parsed or tau is missing for CSV input.
    """
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise CodecError(f"cannot read {path}: {err}") from err
    if path.suffix == ".json":
        series = series_from_dict(decode_json(text))
        if tau is not None and tau != series.tau:
            raise CodecError(f"{path} has tau={series.tau}, not {tau}")
        return series
    if tau is None:
        raise CodecError(f"{path}: CSV series need an explicit tau")
    return decode_series_csv(text, tau)


def orbit_columns(orbit: RgOrbit) -> list[str]:
    return ["l", *orbit.points[0].column_names()]


def orbit_rows(orbit: RgOrbit) -> list[dict[str, Any]]:
    """One row per iterate: l and every Taylor coefficient."""
    columns = orbit.points[0].column_names()
    rows = []
    for level, point in enumerate(orbit.points):
        row: dict[str, Any] = {"l": level}
        row.update(zip(columns, point.stack().ravel().tolist(), strict=True))
        rows.append(row)
    return rows


def write_text(path: Path, text: str) -> None:
    """Write UTF-8 text with '\\n' line endings, creating parent directories."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)
