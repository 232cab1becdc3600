"""Trace files and result reports.

Trace formats:

* ``TEXT``: one decimal id per line; blank lines and lines starting with
  ``#`` are skipped.
* ``BINARY``: little-endian signed 64-bit ids back to back, no header.

Reports are CSV (one fixed header per row type) or JSON shaped as
``{"meta": {"config", "seeds", "versions"}, "rows": [...]}``.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
import sys
from fractions import Fraction
from typing import Any, Iterable, Optional, Sequence

import numpy as np

TEXT = "TEXT"
BINARY = "BINARY"
CSV = "CSV"
JSON = "JSON"
TRACE_FORMATS = (TEXT, BINARY)
REPORT_FORMATS = (CSV, JSON)


class TraceParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte offset {offset}")
        self.offset = offset


def _check_format(fmt: str, allowed) -> str:
    f = fmt.upper()
    if f not in allowed:
        raise ValueError(f"unknown format {fmt!r}; expected one of {', '.join(allowed)}")
    return f


def load_trace(path: str | os.PathLike, fmt: str = TEXT) -> np.ndarray:
    fmt = _check_format(fmt, TRACE_FORMATS)
    with open(path, "rb") as fh:
        data = fh.read()
    if fmt == BINARY:
        if len(data) % 8:
            raise TraceParseError("truncated 8-byte record", len(data) - len(data) % 8)
        return np.frombuffer(data, dtype="<i8").astype(np.int64)
    out = []
    offset = 0
    for line in data.split(b"\n"):
        s = line.strip()
        if s and not s.startswith(b"#"):
            try:
                v = int(s.decode("ascii"), 10)
            except (UnicodeDecodeError, ValueError):
                raise TraceParseError(f"malformed line {line[:40]!r}", offset) from None
            if not 0 <= v < 2**63:
                raise TraceParseError(f"id {v} outside the non-negative 64-bit range", offset)
            out.append(v)
        offset += len(line) + 1
    return np.asarray(out, dtype=np.int64)


def save_trace(trace: Sequence[int], path: str | os.PathLike, fmt: str = TEXT) -> None:
    fmt = _check_format(fmt, TRACE_FORMATS)
    arr = np.asarray(trace, dtype=np.int64)
    with open(path, "wb") as fh:
        if fmt == BINARY:
            fh.write(arr.astype("<i8").tobytes())
        else:
            fh.write(b"".join(b"%d\n" % v for v in arr.tolist()))


# -- reports -------------------------------------------------------------------

def _plain(v: Any) -> Any:
    """Reduce a value to JSON-safe plain data, keeping floats exact via repr."""
    if isinstance(v, (bool, str)) or v is None:
        return v
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if math.isfinite(f) else repr(f)
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, np.ndarray):
        return [_plain(x) for x in v.tolist()]
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, frozenset, set)):
        items = sorted(v) if isinstance(v, (set, frozenset)) else v
        return [_plain(x) for x in items]
    if hasattr(v, "as_dict"):
        return _plain(v.as_dict())
    if dataclasses.is_dataclass(v):
        return _plain(dataclasses.asdict(v))
    return str(v)


def row_dict(row: Any) -> dict:
    if isinstance(row, dict):
        return row
    if hasattr(row, "as_dict"):
        return row.as_dict()
    if dataclasses.is_dataclass(row):
        return dataclasses.asdict(row)
    raise TypeError(f"cannot report a {type(row).__name__}")


def _csv_cell(v: Any) -> str:
    v = _plain(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, dict)):
        return json.dumps(v, separators=(",", ":"))
    return "" if v is None else str(v)


def header_for(rows: Sequence[Any], row_type: Optional[type] = None) -> list:
    t = row_type or (type(rows[0]) if rows else None)
    fields = getattr(t, "CSV_FIELDS", None)
    if fields:
        return list(fields)
    if rows:
        return list(row_dict(rows[0]).keys())
    return []


def render_report(rows: Sequence[Any], fmt: str = CSV, meta: Optional[dict] = None,
                  row_type: Optional[type] = None) -> str:
    fmt = _check_format(fmt, REPORT_FORMATS)
    rows = list(rows)
    if fmt == CSV:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = header_for(rows, row_type)
        if header:
            w.writerow(header)
        for r in rows:
            d = row_dict(r)
            w.writerow([_csv_cell(d.get(h)) for h in header])
        return buf.getvalue()
    doc = {"meta": _plain(meta or {"config": None, "seeds": [], "versions": versions()}),
           "rows": [_plain(row_dict(r)) for r in rows]}
    return json.dumps(doc, indent=2, sort_keys=False, allow_nan=False) + "\n"


def emit_report(rows: Iterable[Any], path: Optional[str | os.PathLike], fmt: str = CSV,
                meta: Optional[dict] = None, row_type: Optional[type] = None) -> str:
    """Write a report to ``path`` (``None`` or ``-`` means stdout) and return its text."""
    text = render_report(list(rows), fmt, meta, row_type)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def versions() -> dict:
    from . import __version__
    return {"setassoc": __version__, "numpy": np.__version__,
            "python": "%d.%d" % sys.version_info[:2]}


def make_meta(config: Any, seeds: Sequence[int]) -> dict:
    return {"config": _plain(config), "seeds": [int(s) for s in seeds], "versions": versions()}
