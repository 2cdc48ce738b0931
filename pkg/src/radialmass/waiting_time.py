"""Waiting-time criterion, bounds and numerical onset.

For compactly supported data with support edge ``c0`` the support stays put
for a positive time iff ``(M - m0(rho)) / (c0 - rho)^(alpha/(alpha-1))``
stays bounded as ``rho -> c0-``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import DomainError, InitialDatum, ModelParams, Trajectory
from .explicit import ansatz_mass, kappa_inverse
from .shocks import extract_shock_from_trajectory

FINITE = "finite"
INFINITE = "infinite-limsup"
INCONCLUSIVE = "inconclusive"

SLOPE_BAND = 0.05


@dataclass(frozen=True)
class WaitingTimeVerdict:
    """Outcome of :func:`classify`.

    ``limsup_estimate`` is the limiting quotient at the edge. ``sup_quotient``
    is its supremum over ``[0, c0)``, which is what the subsolution needs.
    """

    classification: str
    limsup_estimate: float
    lower_bound_T: Optional[float] = None
    measured_onset: Optional[float] = None
    sup_quotient: float = math.nan
    slope: float = math.nan
    method: str = ""

    def __post_init__(self) -> None:
        if self.classification not in (FINITE, INFINITE, INCONCLUSIVE):
            raise DomainError(f"unknown classification {self.classification!r}")
        if self.classification == FINITE:
            if not math.isfinite(self.limsup_estimate):
                raise DomainError("finite verdict needs a finite limsup")
            if not (self.lower_bound_T is not None and self.lower_bound_T > 0):
                raise DomainError("finite verdict needs a positive lower bound")


def _edge(datum: InitialDatum) -> float:
    if datum.total_mass <= 0:
        raise DomainError("waiting-time analysis needs a datum with positive mass")
    c0 = datum.c0
    if not math.isfinite(c0) or c0 <= 0:
        raise DomainError("waiting-time analysis needs compact support away from 0")
    return c0


def quotient(datum: InitialDatum, params: ModelParams, rho) -> np.ndarray:
    """``(M - m0(rho)) / (c0 - rho)^(alpha/(alpha-1))`` for ``rho < c0``."""
    c0 = _edge(datum)
    rho = np.asarray(rho, dtype=float)
    return datum.mass_deficit(rho) / (c0 - rho) ** params.gamma


def sup_quotient(datum: InitialDatum, params: ModelParams, mesh: int = 60) -> float:
    c0 = _edge(datum)
    x = np.concatenate((c0 * np.linspace(1.0, 0.0, 4001)[:-1],
                        c0 * 2.0 ** -np.arange(1, mesh + 1)))
    rho = c0 - x
    return float(np.max(quotient(datum, params, rho[rho < c0])))


def classify(datum: InitialDatum, params: ModelParams, mesh: int = 40) -> WaitingTimeVerdict:
    """Bounded or diverging edge quotient, estimated on ``rho = c0 - c0 2^-k``.

    Data carrying an analytic edge law ``(K, p)`` skip the mesh: the quotient
    is ``K (c0 - rho)^(p - alpha/(alpha-1))``.
    """
    c0 = _edge(datum)
    M = datum.total_mass
    if params.alpha == 1.0:
        return WaitingTimeVerdict(INFINITE, math.inf, method="alpha = 1")
    g = params.gamma
    if datum.edge_behavior is not None and not datum.deltas:
        K, p = datum.edge_behavior
        if p < g * (1 - 1e-12):
            return WaitingTimeVerdict(INFINITE, math.inf, slope=g - p, method="analytic")
        C = K if abs(p - g) <= 1e-12 * g else 0.0
        Csup = sup_quotient(datum, params)
        return WaitingTimeVerdict(FINITE, C, subsolution_horizon(Csup, M, params, datum),
                                  sup_quotient=Csup, slope=g - p, method="analytic")
    k = np.arange(1, mesh + 1)
    x = c0 * 2.0 ** -k
    deficit = datum.mass_deficit(c0 - x)
    keep = deficit > 1e3 * np.finfo(float).eps * M
    if keep.sum() < 3:
        return WaitingTimeVerdict(INCONCLUSIVE, math.nan, method="mesh")
    q = deficit[keep] / x[keep] ** g
    slope = float(np.polyfit(k[keep], np.log2(q), 1)[0])
    if slope > SLOPE_BAND:
        return WaitingTimeVerdict(INFINITE, math.inf, slope=slope, method="mesh")
    d = np.diff(q)
    monotone = bool(np.all(d >= 0) or np.all(d <= 0))
    if slope >= -SLOPE_BAND and not monotone:
        return WaitingTimeVerdict(INCONCLUSIVE, float(q[-1]), slope=slope, method="mesh")
    Csup = sup_quotient(datum, params, mesh)
    return WaitingTimeVerdict(FINITE, float(q[-1]), subsolution_horizon(Csup, M, params, datum),
                              sup_quotient=Csup, slope=slope, method="mesh")


def subsolution_horizon(C: float, M: float, params: ModelParams,
                        datum: Optional[InitialDatum] = None) -> float:
    """Largest ``T`` for which the Ansatz subsolution starts below ``m0``.

    ``T = ((alpha-1)/alpha)^(alpha-1) / (alpha M C^(alpha-1))`` when
    ``M - m0 <= C (c0 - rho)^(alpha/(alpha-1))`` on ``[0, c0]``. If ``datum``
    is given, the ordering is verified on a mesh and ``T`` is reduced by
    bisection when it fails.
    """
    a = params.alpha
    if a <= 1.0:
        raise DomainError("the Ansatz needs alpha > 1")
    if not (C > 0 and M > 0):
        raise DomainError("subsolution_horizon needs C > 0 and M > 0")
    if math.isinf(C):
        return 0.0
    T = ((a - 1.0) / a) ** (a - 1.0) / (a * M * C ** (a - 1.0))
    if datum is None:
        return T
    c0 = _edge(datum)
    x = np.concatenate((c0 * np.linspace(1.0, 0.0, 20001)[:-1], c0 * 2.0 ** -np.arange(1, 60)))
    rho = c0 - x
    rho = rho[rho < c0]
    m0 = datum.mass(rho)

    def ok(T_: float) -> bool:
        return bool(np.all(ansatz_mass(0.0, rho, M, c0, T_, params) <= m0 + 1e-12 * M))

    if ok(T):
        return T
    good = T / 2
    while not ok(good):
        good /= 2
        if good < 1e-12:
            raise DomainError("no positive T places the Ansatz below the datum")
    bad = 2 * good
    for _ in range(40):
        mid = 0.5 * (good + bad)
        good, bad = (mid, bad) if ok(mid) else (good, mid)
    return good


def measure_onset(traj: Trajectory, c0: float, tol: Optional[float] = None) -> float:
    """First stored time at which the numerical front exceeds ``c0 + 2 h_rho``."""
    if not 0 <= c0 <= traj.grid.domain_length:
        raise DomainError(f"c0={c0} outside the domain")
    path = extract_shock_from_trajectory(traj, 1.0, tol)
    moved = np.nonzero(path.locations > c0 + 2 * traj.grid.h_rho)[0]
    return float(traj.times[moved[0]]) if moved.size else float(traj.times[-1])


def supersolution_times(datum: InitialDatum, params: ModelParams, levels: int = 40):
    """Times ``t_k`` at which supersolution ``k`` has its support past ``c0 + (c0 - rho_k)/2``.

    Supersolution ``k`` puts ``m0(rho_k)`` at 0 and the rest at ``rho_k =
    c0 - c0 2^-k``; ``k = 0`` is all mass at the origin.
    """
    a = params.alpha
    c0 = _edge(datum)
    M = datum.total_mass
    out = []
    for k in range(levels + 1):
        x = c0 * 2.0 ** -k
        rho_k = c0 - x
        m2 = float(datum.mass_deficit(rho_k)) if k else M
        m1 = M - m2
        if m2 <= 0:
            continue
        reach = x / 2 + x  # target minus rho_k
        if m1 <= 1e-14 * M:
            t = (reach / M) ** a / a
        else:
            sigma = kappa_inverse(m2 / (a * m1), params)
            t = (reach / (a * m1 * sigma)) ** a
        out.append((k, rho_k, t))
    return out


def supersolution_upper_bound(datum: InitialDatum, params: ModelParams,
                              levels: int = 40) -> float:
    """Upper bound on the waiting time: the smallest ``t_k``."""
    if params.alpha <= 1.0:
        raise DomainError("the two-delta supersolutions need alpha > 1")
    times = supersolution_times(datum, params, levels)
    return min(t for _, _, t in times) if times else math.inf
