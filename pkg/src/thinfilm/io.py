"""Plain-text persistence: trajectory CSVs and self-describing snapshot files."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .diagnostics import RECORD_COLUMNS, DiagnosticsRecord
from .grid import Field, TorusGrid


def fmt(x) -> str:
    """Shortest decimal that round-trips the float exactly."""
    return repr(float(x))


def write_trajectory_csv(path, records) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_COLUMNS)
        for rec in records:
            w.writerow([fmt(x) for x in rec.as_row()])


def read_trajectory_csv(path) -> list[DiagnosticsRecord]:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != RECORD_COLUMNS:
            raise ValueError(f"{path}: unexpected header {header}")
        return [DiagnosticsRecord(*map(float, row)) for row in reader if row]


def write_snapshot(path, u: Field, t: float, epsilon: float) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    g = u.grid
    lines = [
        f"# L={fmt(g.length)}",
        f"# n={g.n}",
        f"# t={fmt(t)}",
        f"# epsilon={fmt(epsilon)}",
    ]
    lines += [f"{fmt(x)},{fmt(v)}" for x, v in zip(g.x, u.values)]
    path.write_text("\n".join(lines) + "\n")


def read_snapshot(path) -> tuple[Field, dict]:
    meta = {}
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].partition("=")
            meta[key.strip()] = val.strip()
            continue
        rows.append([float(c) for c in line.split(",")])
    data = np.array(rows)
    values = data[:, -1]
    L = float(meta.get("L", 1.0))
    n = int(meta.get("n", values.size))
    if n != values.size:
        raise ValueError(f"{path}: header says n={n} but file has {values.size} rows")
    grid = TorusGrid(L, n)
    parsed = {k: (int(v) if k == "n" else float(v)) for k, v in meta.items() if k in ("L", "n", "t", "epsilon")}
    return Field(grid, values), parsed
