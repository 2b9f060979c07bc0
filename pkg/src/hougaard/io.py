"""CSV, JSON and binary ensemble serialization.

CSV files start with ``#`` comment lines carrying the library version and a
JSON metadata record, followed by a header row and comma-separated data.

Binary ensemble layout (little-endian):

* 16-byte magic ``b"HOUGAARD_ENSMBL\\n"``
* 1 version byte (currently 1)
* uint32 ``n_paths``, uint32 ``n_times``, uint32 metadata length ``m``
* ``m`` bytes of UTF-8 JSON metadata
* ``n_times`` float64 times
* ``n_paths * n_times`` float64 values, row-major (one row per path)
"""
from __future__ import annotations

import csv
import io as _io
import json
import struct
import sys
from pathlib import Path

import numpy as np

from ._version import __version__
from .levy_paths import PathEnsemble, TimeGrid
from .stats import _jsonable

__all__ = [
    "MAGIC",
    "BINARY_VERSION",
    "format_csv",
    "write_csv",
    "read_csv",
    "write_ensemble_csv",
    "write_ensemble_binary",
    "read_ensemble_binary",
    "write_json",
]

MAGIC = b"HOUGAARD_ENSMBL\n"
BINARY_VERSION = 1
_HEADER = struct.Struct("<III")


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def format_csv(header, rows, metadata: dict | None = None) -> str:
    buf = _io.StringIO()
    buf.write(f"# hougaard {__version__}\n")
    if metadata:
        buf.write("# metadata: " + json.dumps(_jsonable(metadata), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows, metadata: dict | None = None) -> None:
    text = format_csv(header, rows, metadata)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def read_csv(path):
    """Return ``(metadata, header, data)`` with ``data`` as a float array."""
    meta = {}
    lines = Path(path).read_text().splitlines()
    body = []
    for line in lines:
        if line.startswith("# metadata: "):
            meta = json.loads(line[len("# metadata: "):])
        elif line.startswith("#"):
            continue
        else:
            body.append(line)
    rows = list(csv.reader(body))
    header, data = rows[0], rows[1:]
    return meta, header, np.array(data, dtype=float) if data else np.empty((0, len(header)))


def write_ensemble_csv(path, ens: PathEnsemble, metadata: dict | None = None) -> None:
    header = ["path"] + [f"t={_fmt(t)}" for t in ens.times]
    rows = ([i, *row] for i, row in enumerate(ens.values))
    write_csv(path, header, rows, {**ens.metadata, **(metadata or {})})


def write_ensemble_binary(path, ens: PathEnsemble, metadata: dict | None = None) -> None:
    meta = json.dumps(_jsonable({"version": __version__, **ens.metadata, **(metadata or {})}), sort_keys=True).encode()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(bytes([BINARY_VERSION]))
        f.write(_HEADER.pack(ens.n_paths, ens.times.size, len(meta)))
        f.write(meta)
        f.write(np.asarray(ens.times, dtype="<f8").tobytes())
        f.write(np.ascontiguousarray(ens.values, dtype="<f8").tobytes())


def read_ensemble_binary(path) -> PathEnsemble:
    raw = Path(path).read_bytes()
    if raw[:16] != MAGIC:
        raise ValueError("not a hougaard ensemble file")
    if raw[16] != BINARY_VERSION:
        raise ValueError(f"unsupported ensemble format version {raw[16]}")
    n_paths, n_times, m = _HEADER.unpack_from(raw, 17)
    off = 17 + _HEADER.size
    meta = json.loads(raw[off:off + m].decode())
    off += m
    times = np.frombuffer(raw, dtype="<f8", count=n_times, offset=off).astype(float)
    off += 8 * n_times
    values = np.frombuffer(raw, dtype="<f8", count=n_paths * n_times, offset=off).astype(float).reshape(n_paths, n_times)
    two_sided = bool(times[0] < 0)
    return PathEnsemble(TimeGrid(times, two_sided=two_sided), values, None, meta)


def write_json(path, obj) -> None:
    text = json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)
