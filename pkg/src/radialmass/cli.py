"""Command-line entry point.

Usage::

    radialmass run CONFIG [--key=value ...]
    radialmass exact|converge|waiting-time|levelsets CONFIG [--key=value ...]

Exit codes: 0 success, 2 configuration error, 3 numeric or domain error,
4 I/O error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from typing import Optional, Sequence

from . import csvio, diagnostics, explicit, waiting_time
from .config import ConfigError, RunConfig, parse_config
from .core import DomainError, Grid, MassProfile, build_grid, sample_initial_mass
from .scheme import run_scheme
from .shocks import extract_shock_from_trajectory

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

COMMAND_OUTPUTS = {
    "exact": ("exact",),
    "converge": ("convergence",),
    "waiting-time": ("waiting-time",),
    "levelsets": ("level-sets",),
}

STORED_LEVELS = 2000


def make_grid(cfg: RunConfig) -> Grid:
    params = cfg.params
    grid = build_grid(cfg.datum, params, cfg.h_rho, cfg.t_final, cfg.domain_length,
                      cfg.cfl_fraction)
    if cfg.h_t is None or grid.trivial:
        return grid
    n_time = int(math.ceil(cfg.t_final / cfg.h_t - 1e-9))
    return Grid(grid.h_rho, cfg.h_t, grid.n_space, n_time, grid.lipschitz, grid.mass,
                grid.alpha)


def _snapshot_steps(cfg: RunConfig, grid: Grid) -> list:
    return [min(grid.n_time, int(round(t / grid.h_t))) for t in cfg.snapshot_times]


def _tag(t: float) -> str:
    return format(t, ".6g")


def exact_mass(cfg: RunConfig):
    """Closed-form mass ``(t, rho) -> m`` for presets that have one."""
    p = cfg.params
    pp = cfg.preset_params
    if cfg.preset == "vortex":
        vp = explicit.VortexParams(pp["height"], pp["height"] * pp["length"])
        return lambda t, r: explicit.vortex_mass(t, r, vp, p)
    if cfg.preset == "delta":
        return lambda t, r: explicit.delta_mass_solution(t, r, pp["mass"], pp["location"], p)
    if cfg.preset == "two-deltas":
        tp = explicit.TwoDeltaParams(pp["m1"], pp["m2"], pp["rho1"], pp["rho2"])
        return lambda t, r: explicit.two_deltas_mass(t, r, tp, p)
    return None


def write_exact(cfg: RunConfig, grid: Grid) -> list:
    oracle = exact_mass(cfg)
    if oracle is None:
        raise ConfigError(f"preset {cfg.preset!r} has no closed-form solution")
    written = []
    initial = sample_initial_mass(cfg.datum, grid)
    for n in _snapshot_steps(cfg, grid):
        values = initial.values if n == 0 else oracle(n * grid.h_t, grid.rho)
        path = os.path.join(cfg.output_dir, f"exact_t{_tag(n * grid.h_t)}.csv")
        csvio.write_snapshot(path, MassProfile(values, n), grid, cfg.params,
                             {"source": "exact"})
        written.append(path)
    return written


def write_convergence(cfg: RunConfig) -> str:
    oracle = exact_mass(cfg)
    res = diagnostics.convergence_study(cfg.datum, oracle, cfg.convergence_grids, cfg.t_check,
                                        cfg.params, cfg.domain_length)
    path = os.path.join(cfg.output_dir, "convergence.csv")
    meta = {"alpha": cfg.alpha, "t_check": cfg.t_check,
            "oracle": "exact" if oracle is not None else "reference-h/8",
            "fitted_order": res.fitted_order, "C": res.constant}
    csvio.write_table(path, ["h_rho", "h_t", "error"], [res.h_rho, res.h_t, res.errors], meta)
    return path


def waiting_time_row(cfg: RunConfig, traj) -> tuple:
    verdict = waiting_time.classify(cfg.datum, cfg.params)
    onset = waiting_time.measure_onset(traj, cfg.datum.c0, cfg.onset_tol)
    upper = (waiting_time.supersolution_upper_bound(cfg.datum, cfg.params)
             if cfg.alpha > 1 else math.nan)
    lower = verdict.lower_bound_T if verdict.lower_bound_T is not None else 0.0
    return verdict, onset, lower, upper


def write_waiting_time(cfg: RunConfig, traj) -> str:
    verdict, onset, lower, upper = waiting_time_row(cfg, traj)
    path = os.path.join(cfg.output_dir, "waiting_time.csv")
    C = verdict.limsup_estimate
    lines = ["datum,classification,C,T_lower,onset,T_upper",
             ",".join([cfg.datum.name, verdict.classification, csvio.fmt(C),
                       csvio.fmt(lower), csvio.fmt(onset), csvio.fmt(upper)])]
    os.makedirs(cfg.output_dir, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def execute(cfg: RunConfig, outputs: Sequence[str]) -> list:
    """Produce the requested outputs; returns the written paths."""
    written = []
    if not outputs:
        return written
    grid = make_grid(cfg)
    if "exact" in outputs:
        written += write_exact(cfg, grid)
    if "convergence" in outputs:
        written.append(write_convergence(cfg))
    needs_run = {"snapshots", "shock-path", "level-sets", "waiting-time"} & set(outputs)
    if not needs_run:
        return written
    every = cfg.store_every or max(1, grid.n_time // STORED_LEVELS)
    steps = set(range(0, grid.n_time + 1, every)) | {grid.n_time} | set(_snapshot_steps(cfg, grid))
    traj = run_scheme(sample_initial_mass(cfg.datum, grid), grid, cfg.params,
                      store_steps=sorted(steps))
    if "snapshots" in outputs:
        for n in _snapshot_steps(cfg, grid):
            path = os.path.join(cfg.output_dir, f"snapshot_t{_tag(n * grid.h_t)}.csv")
            csvio.write_snapshot(path, traj.profile_at_step(n), grid, cfg.params,
                                 {"preset": cfg.preset})
            written.append(path)
    if "shock-path" in outputs:
        sp = extract_shock_from_trajectory(traj, 1.0, cfg.onset_tol)
        path = os.path.join(cfg.output_dir, "shock_path.csv")
        csvio.write_table(path, ["t", "S"], [sp.times, sp.locations],
                          {"alpha": cfg.alpha, "h_rho": grid.h_rho, "h_t": grid.h_t})
        written.append(path)
    if "level-sets" in outputs:
        ls = diagnostics.level_set_grid(traj, cfg.levels)
        header = ["t"] + [f"level_{csvio.fmt(v)}" for v in ls.levels]
        path = os.path.join(cfg.output_dir, "level_sets.csv")
        csvio.write_table(path, header, [ls.times] + list(ls.crossings.T),
                          {"alpha": cfg.alpha, "h_rho": grid.h_rho, "h_t": grid.h_t})
        written.append(path)
    if "waiting-time" in outputs:
        written.append(write_waiting_time(cfg, traj))
    return written


def _parse_overrides(items: Sequence[str]) -> dict:
    out = {}
    for item in items:
        if not item.startswith("--") or "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form --key=value")
        key, value = item[2:].split("=", 1)
        out[key.replace("-", "_")] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="radialmass",
                                     description="Monotone solver for m_t + m (m_rho)^alpha = 0.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, desc in (("run", "run the outputs listed in the config"),
                       ("exact", "evaluate the closed-form solution on the grid"),
                       ("converge", "grid-refinement study"),
                       ("waiting-time", "waiting-time report"),
                       ("levelsets", "level-set crossings of the scheme solution")):
        p = sub.add_parser(name, help=desc)
        p.add_argument("config", help="configuration file")
    return parser


def _fail(code: int, kind: str, message: str) -> int:
    text = " ".join(str(message).split())
    print(f"radialmass: error code={code} kind={kind} message={text}", file=sys.stderr)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    try:
        overrides = _parse_overrides(extra)
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            return _fail(EXIT_IO, "io", exc)
        except UnicodeDecodeError as exc:
            raise ConfigError(f"config is not valid UTF-8: {exc}") from None
        cfg = parse_config(text, overrides, base_dir=os.path.dirname(os.path.abspath(args.config)))
        outputs = cfg.outputs if args.command == "run" else COMMAND_OUTPUTS[args.command]
        for path in execute(cfg, outputs):
            print(path)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", exc)
    except OSError as exc:
        return _fail(EXIT_IO, "io", exc)
    except (DomainError, ArithmeticError, ValueError) as exc:
        return _fail(EXIT_NUMERIC, "numeric", exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
