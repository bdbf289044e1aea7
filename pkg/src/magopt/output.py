"""File formats: snapshots, delimited tables, reproducibility headers.

Snapshots are a short ASCII header (one ``key value`` pair per line,
terminated by ``end``) followed by the raw little-endian float64 field
data, rho first then w, row major.  Tables are comma-separated with
``#`` comment lines up front carrying the package version and the
settings that produced the file, so every output can be regenerated
from its own header.  No timestamps anywhere: rerunning a command on
the same inputs gives byte-identical files.
"""

from __future__ import annotations

import hashlib
import io
from typing import Iterable, Mapping, Sequence

import numpy as np

SNAPSHOT_MAGIC = "magopt-snapshot"
SNAPSHOT_VERSION = 1

DIAG_COLUMNS = (
    "step",
    "time",
    "amp_rho_q",
    "amp_w_q",
    "min_rho_pm",
    "mean_rho",
    "max_w",
)


def fmt(value) -> str:
    """Render one table cell; None becomes an empty field."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.12g}"


def params_hash(params) -> str:
    """Short opaque tag identifying a parameter set."""
    return hashlib.md5(repr(params).encode()).hexdigest()[:12]


def header_comments(command: str, settings: Mapping[str, object] | None = None,
                    version: str | None = None) -> list[str]:
    """Standard reproducibility comment lines for an output file."""
    if version is None:
        from . import __version__ as version
    lines = [f"magopt {version}", f"command: {command}"]
    if settings:
        for key in sorted(settings):
            lines.append(f"config {key} = {settings[key]}")
    return lines


def write_table(path: str, columns: Mapping[str, Sequence],
                header_lines: Iterable[str] = ()) -> None:
    """Write a comma-separated table with comment lines up front."""
    names = list(columns)
    series = [columns[name] for name in names]
    lengths = {len(s) for s in series}
    if len(lengths) > 1:
        raise ValueError("table columns have unequal lengths")
    n = lengths.pop() if lengths else 0
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    buf.write(",".join(names) + "\n")
    for i in range(n):
        buf.write(",".join(fmt(s[i]) for s in series) + "\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def read_table(path: str) -> tuple[list[str], dict[str, list[str]], list[str]]:
    """Read a table written by :func:`write_table`.

    Returns (header comment lines, columns as raw strings, column order).
    Empty cells stay empty strings.
    """
    comments: list[str] = []
    names: list[str] | None = None
    columns: dict[str, list[str]] = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if line.startswith("#"):
                comments.append(line[1:].strip())
                continue
            if not line:
                continue
            cells = line.split(",")
            if names is None:
                names = cells
                columns = {name: [] for name in names}
                continue
            for name, cell in zip(names, cells):
                columns[name].append(cell)
    return comments, columns, names or []


def write_diagnostics(path: str, columns: Mapping[str, Sequence],
                      header_lines: Iterable[str] = ()) -> None:
    """Diagnostics table with the fixed column set."""
    missing = [c for c in DIAG_COLUMNS if c not in columns]
    if missing:
        raise ValueError(f"diagnostics columns missing: {missing}")
    ordered = {name: columns[name] for name in DIAG_COLUMNS}
    write_table(path, ordered, header_lines)


def write_snapshot(path: str, rho: np.ndarray, w: np.ndarray, time: float,
                   spacing: float, tag: str = "") -> None:
    """Write one (rho, w) snapshot; see the module docstring for layout."""
    if rho.shape != w.shape:
        raise ValueError("rho and w shapes differ")
    header = [
        f"{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION}",
        f"dims {rho.ndim}",
        "shape " + " ".join(str(s) for s in rho.shape),
        f"spacing {spacing!r}",
        f"time {time!r}",
        f"params_hash {tag}",
        "fields rho w",
        "end",
    ]
    with open(path, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        fh.write(np.ascontiguousarray(rho, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(w, dtype="<f8").tobytes())


def read_snapshot(path: str) -> tuple[np.ndarray, np.ndarray, dict]:
    """Read a snapshot back: (rho, w, metadata dict)."""
    with open(path, "rb") as fh:
        meta: dict[str, str] = {}
        first = fh.readline().decode("ascii").strip()
        magic, _, version = first.partition(" ")
        if magic != SNAPSHOT_MAGIC:
            raise ValueError(f"{path} is not a snapshot file")
        meta["version"] = version
        while True:
            line = fh.readline().decode("ascii").strip()
            if line == "end":
                break
            if not line:
                raise ValueError(f"{path}: truncated snapshot header")
            key, _, value = line.partition(" ")
            meta[key] = value
        shape = tuple(int(s) for s in meta["shape"].split())
        count = int(np.prod(shape))
        data = np.frombuffer(fh.read(2 * count * 8), dtype="<f8")
        if data.size != 2 * count:
            raise ValueError(f"{path}: truncated snapshot data")
    rho = data[:count].reshape(shape).copy()
    w = data[count:].reshape(shape).copy()
    info = {
        "dims": int(meta["dims"]),
        "spacing": float(meta["spacing"]),
        "time": float(meta["time"]),
        "params_hash": meta.get("params_hash", ""),
    }
    return rho, w, info
