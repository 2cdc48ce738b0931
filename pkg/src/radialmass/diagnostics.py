"""Long-time asymptotics, change-of-variable residual, convergence harness, level sets."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .core import DomainError, InitialDatum, ModelParams, Trajectory, build_grid, sample_initial_mass
from .explicit import rescaled_limit
from .scheme import interpolate, iterate_scheme
from .shocks import ShockPath, front_positions

MassOracle = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class RatioCheck:
    t: float
    ratio: float
    lower: float
    upper: float

    @property
    def ok(self) -> bool:
        # rounding slack so that saturated bounds (point masses) still pass
        tol = 1e-12 * max(1.0, abs(self.upper))
        return self.lower - tol <= self.ratio <= self.upper + tol


def support_ratio_check(path: ShockPath, M: float, S0: float, params: ModelParams,
                        h_rho: float = 0.0) -> list:
    """Compare ``S(t)/(M (alpha t)^(1/alpha)) - 1`` with ``[0, S0/M (alpha t)^(-1/alpha)]``.

    Both bounds are widened by ``eps = 2 h_rho / (M (alpha t)^(1/alpha))``.
    """
    a = params.alpha
    out = []
    for t, s in zip(path.times, path.locations):
        if t <= 0:
            continue
        scale = M * (a * t) ** (1.0 / a)
        eps = 2.0 * h_rho / scale
        out.append(RatioCheck(float(t), float(s / scale - 1.0), -eps,
                              float(S0 / scale + eps)))
    return out


def rescaled_profile_error(traj: Trajectory, M: float, t: float, eps: float,
                           params: ModelParams, y_max: float = 2.0,
                           n_points: int = 2001) -> float:
    """``sup |m(t, M (alpha t)^(1/alpha) y) / (M G(y)) - 1|`` over ``y`` in ``[eps, y_max]``."""
    if not (t > 0 and eps > 0 and y_max > eps):
        raise DomainError("need t > 0 and 0 < eps < y_max")
    scale = M * (params.alpha * t) ** (1.0 / params.alpha)
    if y_max * scale > traj.grid.domain_length:
        raise DomainError("rescaled window exceeds the grid domain")
    y = np.linspace(eps, y_max, n_points)
    m = interpolate(traj, np.full_like(y, t), y * scale)
    return float(np.max(np.abs(m / (M * rescaled_limit(y)) - 1.0)))


def theta_residual_from_mass(mass: Callable, params: ModelParams, points: np.ndarray,
                             dt: float, drho: float) -> np.ndarray:
    """Residual of ``theta_t + ((alpha-1)/alpha)^(alpha-1) theta_rho^alpha`` with ``theta = m^g``.

    ``mass(t, rho)`` is evaluated on centered stencils of widths ``dt`` and ``drho``.
    """
    a = params.alpha
    if a <= 1.0:
        raise DomainError("the theta equation needs alpha > 1")
    g = params.gamma
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    t, r = pts[:, 0], pts[:, 1]
    th = lambda tt, rr: np.asarray(mass(tt, rr), dtype=float) ** g
    th_t = (th(t + dt, r) - th(t - dt, r)) / (2 * dt)
    th_r = (th(t, r + drho) - th(t, r - drho)) / (2 * drho)
    return th_t + ((a - 1.0) / a) ** (a - 1.0) * np.clip(th_r, 0.0, None) ** a


def admissible_points(traj: Trajectory, m_floor: float = 1e-8) -> np.ndarray:
    """Interior nodes away from kinks and from ``m = 0``.

    A node is rejected if any undivided second difference in its 3x3
    neighbourhood exceeds ``10 h_rho^2 L``, or if ``m`` is below ``m_floor``.
    """
    V = traj.values
    h = traj.grid.h_rho
    L = max(traj.grid.lipschitz, 1e-300)
    d2 = np.abs(V[:, 2:] - 2 * V[:, 1:-1] + V[:, :-2])
    bad = d2 > 10.0 * h * h * L
    bad = np.pad(bad, ((0, 0), (1, 1)), constant_values=True)
    near = bad.copy()
    near[:, 1:] |= bad[:, :-1]
    near[:, :-1] |= bad[:, 1:]
    near[1:] |= near[:-1].copy()
    near[:-1] |= near[1:].copy()
    ok = ~near & (V > m_floor)
    ok[0] = ok[-1] = False
    ok[:, :2] = ok[:, -2:] = False
    k, j = np.nonzero(ok)
    return np.column_stack((traj.times[k], j * h))


def theta_residual(traj: Trajectory, params: ModelParams,
                   sample_points: Optional[np.ndarray] = None) -> float:
    """Max theta-equation residual of the scheme output at smooth sample points."""
    if sample_points is None:
        sample_points = admissible_points(traj)
    pts = np.atleast_2d(np.asarray(sample_points, dtype=float))
    if pts.size == 0:
        raise DomainError("no admissible sample points")
    times = traj.times
    if times.size < 3:
        raise DomainError("need at least three stored levels")
    dt = float(times[1] - times[0])
    pts = pts[(pts[:, 0] - dt >= times[0]) & (pts[:, 0] + dt <= times[-1])]
    if pts.size == 0:
        raise DomainError("no admissible sample points")
    mass = lambda t, r: interpolate(traj, t, r)
    return float(np.max(np.abs(theta_residual_from_mass(mass, params, pts, dt, traj.grid.h_rho))))


@dataclass(frozen=True)
class ConvergenceResult:
    h_rho: tuple
    h_t: tuple
    errors: tuple
    fitted_order: float
    constant: float

    @property
    def monotone(self) -> bool:
        e = self.errors
        return all(e[i + 1] < e[i] for i in range(len(e) - 1))

    @property
    def within_rate(self) -> bool:
        return all(err <= self.constant * h ** (1.0 / 3.0) * (1 + 1e-12)
                   for h, err in zip(self.h_rho, self.errors))

    @property
    def order_ok(self) -> bool:
        return self.fitted_order >= 1.0 / 3.0 - 0.05

    @property
    def passed(self) -> bool:
        return self.monotone and self.within_rate and self.order_ok


def _fit(hs: Sequence[float], errors: Sequence[float]) -> tuple:
    hs = np.asarray(hs, float)
    err = np.asarray(errors, float)
    order = float(np.polyfit(np.log(hs), np.log(np.maximum(err, 1e-300)), 1)[0])
    coarse = int(np.argmax(hs))
    return order, float(err[coarse] / hs[coarse] ** (1.0 / 3.0))


def convergence_study(datum: InitialDatum, oracle: Optional[MassOracle],
                      grids: Sequence[float], t_check: float, params: ModelParams,
                      domain_length: Optional[float] = None,
                      t_min: float = 0.0) -> ConvergenceResult:
    """Sup-node errors against ``oracle(t, rho)`` over all levels ``t_min < t_n <= t_check``.

    Without an oracle the reference is the scheme at ``min(grids)/8``,
    compared on the coarse nodes at ``t_check``.
    """
    if len(grids) < 3:
        raise DomainError("a convergence study needs at least three grids")
    grids = sorted(float(h) for h in grids)[::-1]
    if domain_length is None:
        domain_length = 1.25 * (datum.c0 + datum.total_mass
                                * (params.alpha * t_check) ** (1.0 / params.alpha)) + 0.1
    built = [build_grid(datum, params, h, t_check, domain_length) for h in grids]
    if oracle is not None:
        errors = []
        for grid in built:
            rho = grid.rho
            err = 0.0
            n_last = int(math.floor(t_check / grid.h_t + 1e-9))
            for n, m in iterate_scheme(sample_initial_mass(datum, grid), grid, params, n_last):
                t = n * grid.h_t
                if t <= t_min:
                    continue
                err = max(err, float(np.max(np.abs(m - oracle(t, rho)))))
            errors.append(err)
    else:
        errors = _self_convergence(datum, built, t_check, params, domain_length)
    order, C = _fit(grids, errors)
    return ConvergenceResult(tuple(grids), tuple(g.h_t for g in built), tuple(errors), order, C)


def _final_profile(datum, grid, params, n_steps) -> np.ndarray:
    m = None
    for _, m in iterate_scheme(sample_initial_mass(datum, grid), grid, params, n_steps):
        pass
    return m.copy()


def _self_convergence(datum, built, t_check, params, domain_length) -> list:
    h_ref = built[-1].h_rho / 8.0
    ref = build_grid(datum, params, h_ref, t_check, domain_length)
    plan = []
    for grid in built:
        r = int(round(grid.h_rho / h_ref))
        n = int(math.floor(t_check / grid.h_t + 1e-9))
        n_ref = int(round(n * grid.h_t / ref.h_t))
        if abs(grid.h_rho - r * h_ref) > 1e-12 * grid.h_rho or \
                abs(n * grid.h_t - n_ref * ref.h_t) > 1e-9 * t_check:
            raise DomainError("grids must be integer multiples of the reference steps")
        plan.append((grid, r, n, n_ref))
    needed = {n_ref for *_, n_ref in plan}
    stored = {}
    for n, m in iterate_scheme(sample_initial_mass(datum, ref), ref, params, max(needed)):
        if n in needed:
            stored[n] = m.copy()
    errors = []
    for grid, r, n, n_ref in plan:
        m = _final_profile(datum, grid, params, n)
        errors.append(float(np.max(np.abs(m - stored[n_ref][::r][: m.size]))))
    return errors


@dataclass(frozen=True)
class LevelSets:
    times: np.ndarray
    levels: np.ndarray
    crossings: np.ndarray  # shape (n_times, n_levels)


def level_set_grid(traj: Trajectory, levels: Sequence[float]) -> LevelSets:
    """Interpolated ``rho`` where ``m(t_n, .)`` first reaches each level.

    Level 0 gives the left edge of the positivity set.
    """
    levels = np.asarray(levels, dtype=float)
    M = traj.total_mass
    if np.any(levels < 0) or np.any(levels > M):
        raise DomainError(f"levels must lie in [0, {M}]")
    h = traj.grid.h_rho
    cols = []
    for lev in levels:
        if lev == 0.0:
            pos = traj.values > 0
            if not np.all(pos[:, -1]):
                cols.append(np.full(traj.times.size, np.nan))
                continue
            first = np.argmax(pos, axis=1)
            cols.append((first - 1) * h)
        else:
            cols.append(front_positions(traj.values, h, lev))
    return LevelSets(traj.times.copy(), levels, np.column_stack(cols))
