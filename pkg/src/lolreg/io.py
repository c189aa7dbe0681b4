"""CSV and JSON formats shared by the command-line tools.

CSV dialect: comma separated, '.' decimal point, mandatory header row, UTF-8.
Lines starting with ``#`` carry ``key=value`` metadata and are skipped by the
readers. Floats in results tables use 6 significant digits.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

FORMAT_VERSION = "lolreg/1"

RESULTS_COLUMNS = (
    "family", "n", "p", "S", "snr", "delta", "rho", "tau_mean",
    "e_y_obs_mean", "e_y_obs_sd", "e_y_sig_mean", "e_y_sig_sd", "s_hat_mean", "seed",
)
DETAIL_COLUMNS = (
    "point", "rep", "e_y_observed", "e_y_signal", "d_loss", "s_hat", "tau", "leaders_count", "error",
)


class CsvFormatError(ValueError):
    pass


def _data_lines(text: str):
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.startswith("#") or not line.strip():
            continue
        yield lineno, line


def read_table(path) -> tuple[dict[str, str], list[str], list[list[str]]]:
    """Return ``(metadata, header, rows)`` with cells as strings."""
    text = Path(path).read_text(encoding="utf-8")
    meta = {}
    for line in text.splitlines():
        if line.startswith("#") and "=" in line:
            key, _, value = line[1:].strip().partition("=")
            meta[key.strip()] = value.strip()
    lines = list(_data_lines(text))
    if not lines:
        raise CsvFormatError(f"{path}: missing header row")
    header = next(csv.reader([lines[0][1]]))
    rows = []
    for lineno, line in lines[1:]:
        row = next(csv.reader([line]))
        if len(row) != len(header):
            raise CsvFormatError(
                f"{path}:{lineno}: expected {len(header)} fields, found {len(row)}")
        rows.append(row)
    return meta, header, rows


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def read_numeric_csv(path) -> tuple[list[str], np.ndarray]:
    """Header and an all-numeric matrix; any bad cell is reported with its line."""
    text = Path(path).read_text(encoding="utf-8")
    lines = list(_data_lines(text))
    if not lines:
        raise CsvFormatError(f"{path}: missing header row")
    header = next(csv.reader([lines[0][1]]))
    if all(_is_number(h) for h in header):
        raise CsvFormatError(f"{path}:{lines[0][0]}: header row is mandatory (found numbers)")
    values = []
    for lineno, line in lines[1:]:
        row = next(csv.reader([line]))
        if len(row) != len(header):
            raise CsvFormatError(
                f"{path}:{lineno}: expected {len(header)} fields, found {len(row)}")
        try:
            values.append([float(c) for c in row])
        except ValueError as exc:
            raise CsvFormatError(f"{path}:{lineno}: {exc}") from None
    if not values:
        raise CsvFormatError(f"{path}: no data rows")
    arr = np.array(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.all(np.isfinite(arr), axis=1))[0])
        raise CsvFormatError(f"{path}:{lines[bad + 1][0]}: non-finite value")
    return header, arr


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "nan" if math.isnan(value) else f"{float(value):.6g}"
    return str(value)


def format_table(columns, rows, meta: dict | None = None) -> str:
    buf = io.StringIO()
    for key, value in (meta or {}).items():
        buf.write(f"# {key}={value}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row[c]) for c in columns])
    return buf.getvalue()


def write_text(path, text: str):
    Path(path).write_text(text, encoding="utf-8")


def json_ready(obj):
    """Recursively convert numpy scalars/arrays and NaN to plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_ready(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return json_ready(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return None if not math.isfinite(f) else f
    return obj


def dumps_report(report: dict) -> str:
    return json.dumps(json_ready(report), sort_keys=True, indent=2) + "\n"
