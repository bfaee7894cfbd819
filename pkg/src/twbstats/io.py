"""File formats: shot CSV, analog CSV, curve CSV, JSON sidecars.

Shot CSV::

    shot,k1,k2
    0,3,2
    ...

UTF-8, LF line endings, no quoting.  ``simulate`` also writes
``<out>.meta.json`` with the seed and parameters.  Analog records use the
header ``shot,x1,x2`` and are converted to counts with an explicit gain.
"""

import json
import math
import os

import numpy as np

from .errors import DataFormatError
from .twb import ShotSeries, series_from_analog

SHOT_HEADER = "shot,k1,k2"
ANALOG_HEADER = "shot,x1,x2"
CURVE_HEADER = "k_mean,g2,stderr"
SCHEMA_VERSION = 1


def meta_path(path):
    return f"{path}.meta.json"


def write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_shots_csv(series, path, write_meta=True):
    idx = np.arange(series.n_shots)
    body = "\n".join(f"{i},{a},{b}" for i, a, b in zip(idx.tolist(), series.k1.tolist(), series.k2.tolist()))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(SHOT_HEADER + "\n")
        if body:
            fh.write(body + "\n")
    if write_meta:
        write_json(meta_path(path), {"schema_version": SCHEMA_VERSION, **series.meta})


def write_analog_csv(series, path, gamma):
    x1 = gamma * series.k1.astype(np.float64)
    x2 = gamma * series.k2.astype(np.float64)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(ANALOG_HEADER + "\n")
        for i, (a, b) in enumerate(zip(x1.tolist(), x2.tolist())):
            fh.write(f"{i},{a!r},{b!r}\n")


def _rows(path, header):
    with open(path, encoding="utf-8", newline="") as fh:
        first = fh.readline()
        if first.rstrip("\r\n") != header:
            raise DataFormatError(f"expected header {header!r}, got {first.rstrip()!r}", line=1)
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split(",")
            if len(fields) != 3:
                raise DataFormatError(f"expected 3 fields, got {len(fields)}", line=lineno)
            yield lineno, fields


def read_shots_csv(path):
    """Read a shot CSV (and its sidecar metadata, if present)."""
    k1, k2 = [], []
    for lineno, fields in _rows(path, SHOT_HEADER):
        try:
            _, a, b = (int(f) for f in fields)
        except ValueError:
            raise DataFormatError(f"non-integer field in {','.join(fields)!r}", line=lineno) from None
        if a < 0 or b < 0:
            raise DataFormatError("counts must be non-negative", line=lineno)
        k1.append(a)
        k2.append(b)
    meta = read_json(meta_path(path)) if os.path.exists(meta_path(path)) else {}
    return ShotSeries(np.array(k1, dtype=np.int64), np.array(k2, dtype=np.int64), meta)


def read_analog_csv(path, gamma):
    x1, x2 = [], []
    for lineno, fields in _rows(path, ANALOG_HEADER):
        try:
            _, a, b = int(fields[0]), float(fields[1]), float(fields[2])
        except ValueError:
            raise DataFormatError(f"unparseable row {','.join(fields)!r}", line=lineno) from None
        x1.append(a)
        x2.append(b)
    meta = read_json(meta_path(path)) if os.path.exists(meta_path(path)) else {}
    return series_from_analog(np.array(x1), np.array(x2), gamma, meta)


def read_series(path, gamma=None):
    """Shot CSV, or analog CSV when ``gamma`` is given."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\r\n")
    if header == ANALOG_HEADER:
        if gamma is None:
            raise DataFormatError("analog records need a gain (--gamma)", line=1)
        return read_analog_csv(path, gamma)
    return read_shots_csv(path)


def read_curve_csv(path):
    rows = []
    for lineno, fields in _rows(path, CURVE_HEADER):
        try:
            row = [float(f) for f in fields]
        except ValueError:
            raise DataFormatError(f"non-numeric field in {','.join(fields)!r}", line=lineno) from None
        if not all(math.isfinite(v) for v in row):
            raise DataFormatError("non-finite value", line=lineno)
        rows.append(row)
    return np.array(rows, dtype=np.float64).reshape(-1, 3)


def write_curve_csv(curve, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CURVE_HEADER + "\n")
        for k, g, e in np.asarray(curve, dtype=np.float64).tolist():
            fh.write(f"{k!r},{g!r},{e!r}\n")


def write_tsv(path, columns, rows):
    def fmt(v):
        if v is None:
            return "nan"
        if isinstance(v, float):
            return repr(v)
        return str(v)

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(columns) + "\n")
        for row in rows:
            fh.write("\t".join(fmt(row.get(c)) for c in columns) + "\n")
