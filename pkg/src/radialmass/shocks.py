"""Rankine-Hugoniot speeds, front integration and numerical front extraction."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import DomainError, ModelParams, Trajectory
from .explicit import TwoDeltaParams, rh_fixed_point


@dataclass(frozen=True)
class ShockPath:
    times: np.ndarray
    locations: np.ndarray
    kind: str = "support-front"
    degenerate: bool = False

    def __post_init__(self) -> None:
        if self.kind not in ("support-front", "internal"):
            raise DomainError(f"unknown shock kind {self.kind!r}")
        t = np.array(self.times, dtype=float)
        s = np.array(self.locations, dtype=float)
        if t.shape != s.shape or t.ndim != 1:
            raise DomainError("times and locations must be 1-D of equal length")
        t.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "locations", s)


def rh_speed(m_at_shock: float, u_minus: float, u_plus: float, params: ModelParams) -> float:
    """``m (u+^alpha - u-^alpha)/(u+ - u-)``, with the limit ``alpha u^(alpha-1)`` when equal."""
    if m_at_shock < 0 or u_minus < 0 or u_plus < 0:
        raise DomainError("rh_speed needs nonnegative inputs")
    a = params.alpha
    if u_minus == u_plus:
        return m_at_shock * a * u_minus ** (a - 1.0)
    return m_at_shock * (u_plus ** a - u_minus ** a) / (u_plus - u_minus)


def integrate_front(u_left: Callable[[float, float], float], m_total: float, S0: float,
                    t_final: float, params: ModelParams, step: float = 1e-4,
                    edge_density: Optional[float] = None) -> ShockPath:
    """Integrate ``dS/dt = m u_left(t, S)^(alpha-1)`` with classical RK4.

    ``edge_density`` is ``u0(S0-)`` for data that are nondecreasing up to a
    cut-off; the path is then checked against the last-characteristic bound
    ``S0 + alpha M u0(S0-)^(alpha-1) t``.
    """
    if not (t_final >= 0 and step > 0):
        raise DomainError("t_final must be >= 0 and step > 0")
    a = params.alpha
    n = max(1, int(math.ceil(t_final / step - 1e-9)))
    dt = t_final / n

    def rhs(t: float, s: float) -> float:
        u = float(u_left(t, s))
        if not math.isfinite(u) or u < 0:
            raise DomainError(f"u_left({t}, {s}) = {u} is not a valid density")
        return m_total * u ** (a - 1.0)

    times = np.linspace(0.0, t_final, n + 1)
    path = np.empty(n + 1)
    s = float(S0)
    path[0] = s
    for i in range(n):
        t = times[i]
        k1 = rhs(t, s)
        k2 = rhs(t + dt / 2, s + dt / 2 * k1)
        k3 = rhs(t + dt / 2, s + dt / 2 * k2)
        k4 = rhs(t + dt, s + dt * k3)
        s = s + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        path[i + 1] = s
    if edge_density is not None:
        bound = S0 + a * m_total * edge_density ** (a - 1.0) * times
        if np.any(path > bound * (1 + 1e-12) + 1e-12):
            raise DomainError("front overtook the last characteristic")
    return ShockPath(times, path)


def integrate_second_front(p: TwoDeltaParams, t_final: float, params: ModelParams,
                           step: float = 1e-4) -> ShockPath:
    """Second shock of the two-delta solution from its Rankine-Hugoniot ODE.

    In ``tau = t^(1/alpha)`` and ``sigma = (S - rho2)/(alpha m1 tau)`` the
    equation reads ``dS/dtau = alpha (m1 + m2)(sigma^-g + alpha)^(-1/g)``,
    whose right-hand side is bounded. The start ``tau = 0`` is singular, and
    the ODE's own self-similar fixed point supplies the initial slope.
    """
    a, g = params.alpha, params.gamma
    total = p.m1 + p.m2
    sigma0 = rh_fixed_point(p, params)
    tau_final = t_final ** (1.0 / a)
    n = max(1, int(math.ceil(t_final / step - 1e-9)))
    dtau = tau_final / n

    def rhs(tau: float, s: float) -> float:
        if tau == 0.0:
            return a * p.m1 * sigma0
        sigma = (s - p.rho2) / (a * p.m1 * tau)
        if sigma <= 0:
            return 0.0
        return a * total * sigma * (1.0 + a * sigma ** g) ** (-1.0 / g)

    taus = np.linspace(0.0, tau_final, n + 1)
    path = np.empty(n + 1)
    s = p.rho2
    path[0] = s
    for i in range(n):
        tau = taus[i]
        k1 = rhs(tau, s)
        k2 = rhs(tau + dtau / 2, s + dtau / 2 * k1)
        k3 = rhs(tau + dtau / 2, s + dtau / 2 * k2)
        k4 = rhs(tau + dtau, s + dtau * k3)
        s = s + dtau / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        path[i + 1] = s
    return ShockPath(taus ** a, path, kind="internal")


def front_positions(values: np.ndarray, h_rho: float, target: float) -> np.ndarray:
    """Smallest ``rho`` where each row reaches ``target`` (linear interpolation)."""
    v = np.atleast_2d(values)
    reached = v >= target
    if not np.all(reached[:, -1]):
        raise DomainError("level never reached inside the domain")
    k = np.argmax(reached, axis=1)
    out = np.zeros(v.shape[0])
    pos = k > 0
    rows = np.nonzero(pos)[0]
    kk = k[pos]
    lo, hi = v[rows, kk - 1], v[rows, kk]
    out[pos] = (kk - 1 + (target - lo) / (hi - lo)) * h_rho
    return out


def extract_shock_from_trajectory(traj: Trajectory, level_fraction: float = 1.0,
                                  tol: Optional[float] = None) -> ShockPath:
    """Numerical front: smallest ``rho`` with ``m >= level_fraction M - tol``.

    ``tol`` defaults to ``1e-3 M``, which filters the numerical diffusion
    ahead of the front.
    """
    if not 0 < level_fraction <= 1:
        raise DomainError("level_fraction must lie in (0, 1]")
    M = traj.total_mass
    if tol is None:
        tol = 1e-3 * M
    if M == 0:
        return ShockPath(traj.times, np.zeros(traj.times.size), degenerate=True)
    target = level_fraction * M - tol
    if target <= 0:
        raise DomainError("tolerance swallows the whole level")
    return ShockPath(traj.times, front_positions(traj.values, traj.grid.h_rho, target))
