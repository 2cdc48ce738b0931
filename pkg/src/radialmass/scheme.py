"""Monotone explicit-implicit scheme for the mass equation.

One step reads ``M_j^{n+1} = M_j^n / (1 + h_t H(U_j^n))`` with the backward
difference ``U_j^n = (M_j^n - M_{j-1}^n)/h_rho``, ``M_0^n = 0`` and a
clamped Hamiltonian ``H(s) = min(max(s, 0), L)^alpha``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

import numpy as np

from .core import (
    CFLError,
    DomainError,
    Grid,
    MassProfile,
    ModelParams,
    Trajectory,
    cfl_number,
)


@dataclass(frozen=True)
class SchemeState:
    current: MassProfile
    step_count: int
    hamiltonian_cutoff: float


def hamiltonian(s, cutoff: float, params: ModelParams):
    """Clamp ``s`` to ``[0, cutoff]`` and raise to the power ``alpha``."""
    if not cutoff > 0:
        raise DomainError("the Hamiltonian cut-off must be positive")
    out = np.power(np.clip(np.asarray(s, dtype=float), 0.0, cutoff), params.alpha)
    return float(out) if np.ndim(out) == 0 else out


def scheme_step_cell(p: float, q: float, grid: Grid, state: SchemeState,
                     params: ModelParams) -> float:
    """``G(p, q) = p / (1 + h_t H((p - q)/h_rho))`` for a single node."""
    p64, q64 = np.float64(p), np.float64(q)
    s = (p64 - q64) / np.float64(grid.h_rho)
    h = np.power(np.clip(s, 0.0, state.hamiltonian_cutoff), np.float64(params.alpha))
    return float(p64 / (np.float64(1.0) + np.float64(grid.h_t) * h))


def _step(m: np.ndarray, h_rho: float, h_t: float, cutoff: float, alpha: float,
          out: np.ndarray, work: np.ndarray) -> None:
    # Same operation sequence as scheme_step_cell, vectorized over j >= 1.
    w = work[1:]
    np.subtract(m[1:], m[:-1], out=w)
    np.divide(w, h_rho, out=w)
    np.clip(w, 0.0, cutoff, out=w)
    np.power(w, alpha, out=w)
    np.multiply(w, h_t, out=w)
    np.add(w, 1.0, out=w)
    np.divide(m[1:], w, out=out[1:])
    out[0] = 0.0


def check_cfl(initial: MassProfile, grid: Grid, params: ModelParams) -> float:
    """Defensive recheck of the CFL condition against the actual profile.

    Returns the cut-off to use in the Hamiltonian.
    """
    v = initial.values
    if v.size != grid.n_space + 1:
        raise DomainError(f"profile has {v.size} nodes, grid expects {grid.n_space + 1}")
    problems = initial.violations()
    if problems:
        raise DomainError("invalid initial profile: " + "; ".join(problems))
    sup_u = float(np.max(np.diff(v)) / grid.h_rho)
    mass = float(v[-1])
    if grid.trivial or mass == 0.0:
        return max(grid.lipschitz, sup_u, 1.0)
    cutoff = grid.lipschitz
    if sup_u > cutoff * (1.0 + 1e-12) or mass > grid.mass * (1.0 + 1e-12):
        raise CFLError(
            f"profile constants (L={sup_u:.6g}, M={mass:.6g}) exceed the grid's "
            f"(L={grid.lipschitz:.6g}, M={grid.mass:.6g})"
        )
    if cfl_number(grid.h_rho, grid.h_t, cutoff, grid.mass, params.alpha) > 0.5:
        raise CFLError("time step violates the CFL bound")
    return cutoff


def iterate_scheme(initial: MassProfile, grid: Grid, params: ModelParams,
                   n_steps: Optional[int] = None) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(n, M^n)`` for ``n = 0..n_steps``.

    The yielded array is reused between steps; copy it to keep it.
    """
    cutoff = check_cfl(initial, grid, params)
    n_steps = grid.n_time if n_steps is None else n_steps
    a = np.array(initial.values, dtype=float)
    b = np.empty_like(a)
    work = np.empty_like(a)
    yield 0, a
    for n in range(1, n_steps + 1):
        _step(a, grid.h_rho, grid.h_t, cutoff, params.alpha, b, work)
        a, b = b, a
        yield n, a


def run_scheme(initial: MassProfile, grid: Grid, params: ModelParams,
               store_every: int = 1, store_steps: Optional[Iterable[int]] = None,
               n_steps: Optional[int] = None) -> Trajectory:
    """Run the scheme and keep every ``store_every``-th level (plus the last).

    ``store_steps`` overrides ``store_every`` with an explicit set of steps.
    """
    n_steps = grid.n_time if n_steps is None else n_steps
    if store_steps is not None:
        wanted = set(int(n) for n in store_steps if 0 <= n <= n_steps)
    else:
        if store_every < 1:
            raise DomainError("store_every must be >= 1")
        wanted = set(range(0, n_steps + 1, store_every))
        wanted.add(n_steps)
    steps, rows = [], []
    for n, m in iterate_scheme(initial, grid, params, n_steps):
        if n in wanted:
            steps.append(n)
            rows.append(m.copy())
    return Trajectory(np.array(rows), np.array(steps), grid.with_time_steps(n_steps), params)


def numerical_derivative_bound(traj: Trajectory) -> np.ndarray:
    """``sup_j U_j^n`` for every stored level."""
    return np.max(np.diff(traj.values, axis=1), axis=1) / traj.grid.h_rho


def interpolate(traj: Trajectory, t, rho):
    """Piecewise-linear space-time interpolant on stored levels.

    Each cell is split along its anti-diagonal in normalized coordinates
    ``(xi, tau)``. The lower triangle uses nodes ``(n, j), (n, j+1), (n+1, j)``
    and the upper triangle ``(n+1, j+1), (n+1, j), (n, j+1)``.
    """
    t = np.asarray(t, dtype=float)
    rho = np.asarray(rho, dtype=float)
    times = traj.times
    h = traj.grid.h_rho
    J = traj.values.shape[1] - 1
    tol = 1e-12 * max(1.0, times[-1])
    if np.any(t < times[0] - tol) or np.any(t > times[-1] + tol) or np.any(rho < -1e-12 * h) \
            or np.any(rho > J * h * (1 + 1e-12)):
        raise DomainError("interpolation query outside the stored grid box")
    t, rho = np.broadcast_arrays(t, rho)
    if times.size == 1:
        k = np.zeros(t.shape, dtype=int)
        tau = np.zeros(t.shape)
        k1 = k
    else:
        k = np.clip(np.searchsorted(times, t, side="right") - 1, 0, times.size - 2)
        k1 = k + 1
        tau = np.clip((t - times[k]) / (times[k1] - times[k]), 0.0, 1.0)
    j = np.clip(np.floor(rho / h).astype(int), 0, J - 1)
    xi = np.clip(rho / h - j, 0.0, 1.0)
    V = traj.values
    a = V[k, j]
    b = V[k, j + 1]
    c = V[k1, j]
    d = V[k1, j + 1]
    lower = xi + tau <= 1.0
    low_val = a + xi * (b - a) + tau * (c - a)
    up_val = d + (1.0 - xi) * (c - d) + (1.0 - tau) * (b - d)
    out = np.where(lower, low_val, up_val)
    # exact node values
    out = np.where((xi == 0) & (tau == 0), a, out)
    out = np.where((xi == 1) & (tau == 0), b, out)
    out = np.where((xi == 0) & (tau == 1), c, out)
    out = np.where((xi == 1) & (tau == 1), d, out)
    return float(out) if out.ndim == 0 else out
