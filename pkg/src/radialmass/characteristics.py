"""Classical solutions by characteristics for short times.

Along ``rho = P_t(rho0) = rho0 + alpha m0(rho0) u0(rho0)^(alpha-1) t`` the
density evolves as ``u = (u0^-alpha + alpha t)^(-1/alpha)`` and the mass as
``m = m0 (1 + alpha u0^alpha t)^(1 - 1/alpha)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DomainError, InitialDatum, ModelParams

GRID_POINTS = 100_000


@dataclass(frozen=True)
class Horizon:
    """Classical existence horizon ``1/(alpha L_char)`` and how it was found."""

    value: float
    lipschitz_L_char: float
    resolution: int
    crossing: bool
    reason: str

    def __float__(self) -> float:
        return self.value


class CharacteristicField:
    """Initial datum plus the constant ``L_char = sup |u0^alpha + m0 (u0^(alpha-1))'|``.

    ``L_char`` is estimated with centered differences on ``n_grid`` points
    over the support. Its growth under grid refinement is recorded so that
    non-Lipschitz ``u0^(alpha-1)`` can be detected.
    """

    def __init__(self, datum: InitialDatum, params: ModelParams,
                 n_grid: int = GRID_POINTS, extent: float | None = None) -> None:
        if datum.deltas:
            raise DomainError("characteristics need a datum without point masses")
        if datum.density is None:
            raise DomainError("characteristics need a density")
        self.datum = datum
        self.params = params
        self.n_grid = int(n_grid)
        c0 = datum.c0
        if extent is None:
            extent = c0 if math.isfinite(c0) else 1.0
        self.extent = float(extent)
        self.nondecreasing = self._is_nondecreasing()
        self.estimates = self._estimates()
        self.lipschitz_L_char = self.estimates[-1][1]

    def _is_nondecreasing(self) -> bool:
        if self.datum.monotone_cutoff:
            return True
        r = np.linspace(0.0, self.extent, 20_001)[:-1]
        return bool(np.all(np.diff(self.datum.u0(r)) >= -1e-14))

    def _L_on(self, n: int) -> float:
        a = self.params.alpha
        r = np.linspace(0.0, self.extent, n + 1)
        h = r[1] - r[0]
        u = self.datum.u0(r)
        if a == 1.0:
            return float(np.max(np.abs(u)))
        w = self.datum.u0(np.concatenate(([-h], r, [r[-1] + h]))) ** (a - 1.0)
        w[0] = w[1]  # reflect at the origin
        dw = (w[2:] - w[:-2]) / (2 * h)
        return float(np.max(np.abs(u ** a + self.datum.mass(r) * dw)))

    def _estimates(self) -> list:
        sizes = [self.n_grid // 8, self.n_grid // 4, self.n_grid // 2, self.n_grid]
        return [(n, self._L_on(n)) for n in sizes]

    def divergence_slope(self) -> float:
        n = np.log([e[0] for e in self.estimates])
        L = np.log([max(e[1], 1e-300) for e in self.estimates])
        return float(np.polyfit(n, L, 1)[0])


def characteristic_map(rho0, t: float, field: CharacteristicField, params: ModelParams):
    """``P_t(rho0) = rho0 + alpha m0(rho0) u0(rho0)^(alpha-1) t``."""
    a = params.alpha
    rho0 = np.asarray(rho0, dtype=float)
    u = field.datum.u0(rho0)
    out = rho0 + a * field.datum.mass(rho0) * u ** (a - 1.0) * t
    return float(out) if out.ndim == 0 else out


def classical_horizon(field: CharacteristicField, params: ModelParams) -> Horizon:
    """Return ``1/(alpha L_char)``, ``inf`` for nondecreasing data, 0 if characteristics cross at once."""
    a = params.alpha
    L = field.lipschitz_L_char
    res = field.n_grid
    if field.nondecreasing:
        return Horizon(math.inf, L, res, False, "nondecreasing datum")
    slope = field.divergence_slope()
    first = field.estimates[0][1]
    if slope > 0.1 and L > 1.1 * first:
        return Horizon(0.0, math.inf, res, True,
                       f"difference quotients grow like N^{slope:.2f}")
    if L == 0:
        return Horizon(math.inf, 0.0, res, False, "L_char = 0")
    return Horizon(1.0 / (a * L), L, res, False, "estimated on grid")


def solve_by_characteristics(t: float, rho, field: CharacteristicField,
                             params: ModelParams, horizon: Horizon | None = None):
    """Return ``(u, m)`` at ``(t, rho)`` by bisection inversion of ``P_t``.

    For nondecreasing data with a cut-off at ``c0`` the map ``P_t`` jumps
    down at ``c0``. Points below ``P_t(c0-)`` get the left-branch solution,
    which is the entropy solution only left of the front; see
    :func:`radialmass.shocks.integrate_front` for the front itself.
    """
    a = params.alpha
    if horizon is None:
        horizon = classical_horizon(field, params)
    if t < 0 or t >= horizon.value:
        raise DomainError(f"t={t} beyond the classical horizon {horizon.value}")
    rho = np.asarray(rho, dtype=float)
    scalar = rho.ndim == 0
    rho = np.atleast_1d(rho)
    datum = field.datum
    c0 = datum.c0
    lo = np.zeros_like(rho)
    hi = rho.copy()
    beyond = np.zeros(rho.shape, dtype=bool)
    if field.nondecreasing and math.isfinite(c0):
        # P_t jumps down at the cut-off: left branch below P_t(c0-), identity above
        last = characteristic_map(np.nextafter(c0, 0.0), t, field, params)
        beyond = rho >= last
        hi = np.where(beyond, rho, np.minimum(rho, c0))
        lo = np.where(beyond, rho, lo)
    for _ in range(200):
        if np.all(hi - lo <= 1e-12):
            break
        mid = 0.5 * (lo + hi)
        left = np.asarray(characteristic_map(mid, t, field, params)) < rho
        lo = np.where(left, mid, lo)
        hi = np.where(left, hi, mid)
    r0 = np.where(beyond, rho, 0.5 * (lo + hi))
    u0 = datum.u0(r0)
    with np.errstate(divide="ignore"):
        u = np.where(u0 > 0, (u0 ** (-a) + a * t) ** (-1.0 / a), 0.0)
    m = datum.mass(r0) * (1.0 + a * u0 ** a * t) ** (1.0 - 1.0 / a)
    if scalar:
        return float(u[0]), float(m[0])
    return u, m
