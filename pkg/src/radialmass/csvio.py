"""CSV export with ``#`` metadata lines and round-trip float formatting."""

from __future__ import annotations

import os
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import Grid, MassProfile, ModelParams, density_from_mass


def fmt(x: float) -> str:
    """17 significant digits: parses back to the identical double."""
    return format(float(x), ".17g")


def write_table(path: str, header: Sequence[str], columns: Iterable[Sequence[float]],
                meta: Mapping[str, object] = ()) -> None:
    cols = [np.asarray(c, dtype=float) for c in columns]
    lines = [f"# {k}={v if isinstance(v, str) else fmt(v)}" for k, v in dict(meta).items()]
    lines.append(",".join(header))
    for row in zip(*cols):
        lines.append(",".join(fmt(x) for x in row))
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_table(path: str) -> tuple[dict, list, np.ndarray]:
    """Return ``(meta, header, data)``; meta values stay strings."""
    meta, header, rows = {}, None, []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                meta[key] = value
            elif header is None:
                header = line.split(",")
            elif line:
                rows.append([float(x) for x in line.split(",")])
    data = np.array(rows, dtype=float).reshape(len(rows), len(header or []))
    return meta, header or [], data


def write_snapshot(path: str, profile: MassProfile, grid: Grid, params: ModelParams,
                   extra: Mapping[str, object] = ()) -> None:
    """Columns ``rho,m,u`` with ``alpha, h_rho, h_t, t`` metadata."""
    meta = {"alpha": params.alpha, "h_rho": grid.h_rho, "h_t": grid.h_t,
            "t": profile.time_index * grid.h_t}
    meta.update(dict(extra))
    u = density_from_mass(profile, grid)
    write_table(path, ["rho", "m", "u"], [grid.rho, profile.values, u], meta)


def read_snapshot(path: str) -> tuple[dict, np.ndarray, np.ndarray, np.ndarray]:
    meta, header, data = read_table(path)
    if header != ["rho", "m", "u"]:
        raise ValueError(f"{path}: not a snapshot file (header {header})")
    return meta, data[:, 0], data[:, 1], data[:, 2]
