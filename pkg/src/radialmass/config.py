"""Run configuration: a line-oriented ``key = value`` format with sections.

Keys may appear before any ``[section]`` header. Inside a section only that
section's keys are accepted. Any unknown or repeated key is an error.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import DomainError, InitialDatum, ModelParams, build_grid, max_time_ratio
from . import presets


class ConfigError(ValueError):
    """Invalid configuration content."""

    def __init__(self, message: str, line: Optional[int] = None) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


OUTPUT_KINDS = ("snapshots", "shock-path", "level-sets", "convergence", "waiting-time")

SECTIONS = {
    "run": ("alpha", "dim", "omega_d", "h_rho", "h_t", "t_final", "domain_length",
            "cfl_fraction", "output_dir", "store_every"),
    "datum": ("preset", "height", "length", "mass", "location", "m1", "rho1", "m2",
              "rho2", "beta", "samples_file"),
    "outputs": ("outputs", "snapshot_times", "levels", "convergence_grids", "t_check",
                "onset_tol"),
}
HOME = {key: sec for sec, keys in SECTIONS.items() for key in keys}

PRESET_KEYS = {
    "vortex": {"height": 1.0, "length": 1.0},
    "delta": {"mass": 1.0, "location": 0.0},
    "two-deltas": {"m1": None, "rho1": None, "m2": None, "rho2": None},
    "power-beta": {"beta": None},
    "custom-samples": {"samples_file": None},
}


@dataclass(frozen=True)
class RunConfig:
    alpha: float
    h_rho: float
    t_final: float
    domain_length: float
    preset: str
    preset_params: dict
    outputs: tuple = ("snapshots",)
    snapshot_times: tuple = ()
    levels: tuple = ()
    convergence_grids: tuple = ()
    t_check: float = 0.0
    onset_tol: Optional[float] = None
    output_dir: str = "out"
    dim: int = 1
    omega_d: Optional[float] = None
    h_t: Optional[float] = None
    cfl_fraction: float = 1.0
    store_every: Optional[int] = None
    base_dir: str = "."
    datum: InitialDatum = field(default=None, compare=False, repr=False)

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.alpha, self.dim, self.omega_d)


def read_entries(text: str) -> dict:
    """``{key: (value, line)}`` with section placement and duplicates checked."""
    entries: dict = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {raw.strip()!r}", lineno)
            section = line[1:-1].strip()
            if section not in SECTIONS:
                raise ConfigError(f"unknown section [{section}]", lineno)
            continue
        key, eq, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not eq or not key:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        if key not in HOME:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if section is not None and HOME[key] != section:
            raise ConfigError(f"key {key!r} belongs in [{HOME[key]}], not [{section}]", lineno)
        if key in entries:
            raise ConfigError(
                f"duplicate key {key!r} (first set on line {entries[key][1]})", lineno)
        entries[key] = (value, lineno)
    return entries


def _float(entries, key, default=None, positive=True, required=False):
    if key not in entries:
        if required:
            raise ConfigError(f"missing required key {key!r}")
        return default
    value, line = entries[key]
    try:
        x = float(value)
    except ValueError:
        raise ConfigError(f"malformed number for {key!r}: {value!r}", line) from None
    if not math.isfinite(x):
        raise ConfigError(f"{key!r} must be finite", line)
    if positive and not x > 0:
        raise ConfigError(f"{key!r} must be positive, got {value}", line)
    return x


def _list(entries, key, default=()):
    if key not in entries:
        return tuple(default)
    value, line = entries[key]
    if not value:
        return ()
    out = []
    for item in value.split(","):
        try:
            out.append(float(item))
        except ValueError:
            raise ConfigError(f"malformed number {item.strip()!r} in {key!r}", line) from None
    return tuple(out)


def _build_datum(preset: str, pp: dict, base_dir: str, line) -> InitialDatum:
    try:
        if preset == "vortex":
            return presets.vortex(pp["height"], pp["length"])
        if preset == "delta":
            return presets.delta(pp["mass"], pp["location"])
        if preset == "two-deltas":
            return presets.two_deltas(pp["m1"], pp["rho1"], pp["m2"], pp["rho2"])
        if preset == "power-beta":
            return presets.power_beta(pp["beta"])
        path = pp["samples_file"]
        if not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
        return presets.from_mass_samples(data[:, 0], data[:, 1])
    except ValueError as exc:  # includes DomainError and malformed sample files
        raise ConfigError(f"invalid {preset} parameters: {exc}", line) from None


def apply_overrides(text: str, overrides: dict) -> dict:
    entries = read_entries(text)
    for key, value in overrides.items():
        if key not in HOME:
            raise ConfigError(f"unknown override key {key!r}")
        entries[key] = (str(value), None)
    return entries


def parse_config(text: str, overrides: Optional[dict] = None, base_dir: str = ".") -> RunConfig:
    """Parse and validate a configuration; ``overrides`` replace file values."""
    entries = apply_overrides(text, overrides or {})
    alpha = _float(entries, "alpha", required=True)
    if alpha < 1.0:
        raise ConfigError(f"alpha={alpha:g} is outside the supported scope alpha >= 1",
                          entries["alpha"][1])
    h_rho = _float(entries, "h_rho", required=True)
    t_final = _float(entries, "t_final", required=True)
    if "preset" not in entries:
        raise ConfigError("missing required key 'preset'")
    preset, pline = entries["preset"]
    if preset not in PRESET_KEYS:
        raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESET_KEYS)}", pline)
    allowed = PRESET_KEYS[preset]
    pp = {}
    for key in SECTIONS["datum"]:
        if key == "preset" or key not in entries:
            continue
        if key not in allowed:
            raise ConfigError(f"key {key!r} does not apply to preset {preset!r}",
                              entries[key][1])
    for key, default in allowed.items():
        if key == "samples_file":
            if key not in entries:
                raise ConfigError("preset 'custom-samples' needs 'samples_file'")
            pp[key] = entries[key][0]
            continue
        pp[key] = _float(entries, key, default, positive=key not in ("location", "rho1"),
                         required=default is None)
        if key in ("location", "rho1") and pp[key] < 0:
            raise ConfigError(f"{key!r} must be >= 0", entries[key][1])
    datum = _build_datum(preset, pp, base_dir, pline)

    dim_f = _float(entries, "dim", 1.0)
    if dim_f != int(dim_f):
        raise ConfigError("'dim' must be a positive integer", entries["dim"][1])
    omega_d = _float(entries, "omega_d", None)
    cfl_fraction = _float(entries, "cfl_fraction", 1.0)
    if cfl_fraction > 1.0:
        raise ConfigError("'cfl_fraction' must not exceed 1", entries["cfl_fraction"][1])
    reach = datum.c0 + datum.total_mass * (alpha * t_final) ** (1.0 / alpha)
    domain_length = _float(entries, "domain_length", None)
    if domain_length is None:
        domain_length = float(np.ceil((1.25 * reach + 4 * h_rho) / h_rho) * h_rho)
    params = ModelParams(alpha, int(dim_f), omega_d)

    h_t = _float(entries, "h_t", None)
    if h_t is not None:
        grid = build_grid(datum, params, h_rho, t_final, domain_length)
        bound = grid.h_rho * max_time_ratio(grid.lipschitz, grid.mass, alpha)
        if h_t > bound:
            raise ConfigError(
                f"h_t={h_t:g} violates the CFL bound h_t <= {bound:.17g}", entries["h_t"][1])

    if "outputs" in entries:
        value, line = entries["outputs"]
        outputs = tuple(x.strip() for x in value.split(",") if x.strip())
        for kind in outputs:
            if kind not in OUTPUT_KINDS:
                raise ConfigError(f"unknown output {kind!r}; choose from {OUTPUT_KINDS}", line)
    else:
        outputs = ("snapshots",)
    snapshot_times = _list(entries, "snapshot_times", (t_final,))
    for t in snapshot_times:
        if not 0 <= t <= t_final:
            raise ConfigError(f"snapshot time {t:g} outside [0, t_final]",
                              entries.get("snapshot_times", (None, None))[1])
    levels = _list(entries, "levels", tuple(datum.total_mass * f for f in (0.25, 0.5, 0.75, 1.0)))
    grids = _list(entries, "convergence_grids", (4 * h_rho, 2 * h_rho, h_rho))
    if "convergence" in outputs and len(grids) < 3:
        raise ConfigError("'convergence_grids' needs at least three entries")
    t_check = _float(entries, "t_check", t_final)
    onset_tol = _float(entries, "onset_tol", None)
    store_every = _float(entries, "store_every", None)
    output_dir = entries["output_dir"][0] if "output_dir" in entries else "out"
    return RunConfig(
        alpha=alpha, h_rho=h_rho, t_final=t_final, domain_length=domain_length,
        preset=preset, preset_params=pp, outputs=outputs, snapshot_times=snapshot_times,
        levels=levels, convergence_grids=grids, t_check=t_check, onset_tol=onset_tol,
        output_dir=output_dir, dim=int(dim_f), omega_d=omega_d, h_t=h_t,
        cfl_fraction=cfl_fraction, store_every=None if store_every is None else int(store_every),
        base_dir=base_dir, datum=datum,
    )
