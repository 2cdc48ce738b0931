"""Library of initial data used in examples, tests and the CLI."""

from __future__ import annotations

from dataclasses import replace
from typing import Sequence

import numpy as np

from .core import DomainError, InitialDatum


def vortex(height: float = 1.0, length: float = 1.0) -> InitialDatum:
    """Plateau ``u0 = height`` on ``[0, length)``."""
    if not (height > 0 and length > 0):
        raise DomainError("vortex height and length must be positive")
    M = height * length
    return InitialDatum(
        total_mass=M,
        lipschitz_bound=height,
        density=lambda r: np.where((r >= 0) & (r < length), height, 0.0),
        cumulative=lambda r: height * np.clip(r, 0.0, length),
        support_end=length,
        deficit=lambda r: height * np.clip(length - np.asarray(r), 0.0, length),
        edge_behavior=(height, 1.0),
        monotone_cutoff=True,
        name="vortex",
    )


def delta(mass: float = 1.0, location: float = 0.0) -> InitialDatum:
    if not mass > 0 or location < 0:
        raise DomainError("delta needs mass > 0 and location >= 0")
    return InitialDatum(total_mass=mass, lipschitz_bound=0.0,
                        deltas=((location, mass),), name="delta")


def two_deltas(m1: float, rho1: float, m2: float, rho2: float) -> InitialDatum:
    if not (m1 > 0 and m2 > 0 and 0 <= rho1 < rho2):
        raise DomainError("two deltas need positive masses and 0 <= rho1 < rho2")
    return InitialDatum(total_mass=m1 + m2, lipschitz_bound=0.0,
                        deltas=((rho1, m1), (rho2, m2)), name="two-deltas")


def power_law(coef: float, beta: float, c0: float = 1.0) -> InitialDatum:
    """``u0 = coef * (c0 - rho)_+^beta`` with ``beta >= 0``."""
    if not (coef > 0 and beta >= 0 and c0 > 0):
        raise DomainError("power law needs coef > 0, beta >= 0, c0 > 0")
    b1 = beta + 1.0
    M = coef * c0 ** b1 / b1

    def deficit(r):
        return coef * np.clip(c0 - np.asarray(r, float), 0.0, c0) ** b1 / b1

    return InitialDatum(
        total_mass=M,
        lipschitz_bound=coef * c0 ** beta,
        density=lambda r: coef * np.clip(c0 - np.asarray(r, float), 0.0, None) ** beta
        * (np.asarray(r) < c0),
        cumulative=lambda r: M - deficit(r),
        support_end=c0,
        deficit=deficit,
        edge_behavior=(coef / b1, b1),
        name=f"power-{coef:g}-{beta:g}",
    )


def power_beta(beta: float) -> InitialDatum:
    """``u0 = (beta+1)(1-rho)_+^beta``, unit mass."""
    d = power_law(beta + 1.0, beta, 1.0)
    return _renamed(d, f"power-beta-{beta:g}")


def no_characteristics(eps: float, alpha: float, c0: float = 1.0) -> InitialDatum:
    """``u0 = (c0 - rho)_+^((1-eps)/(alpha-1))``: characteristics cross at once."""
    if alpha <= 1 or not 0 < eps < 1:
        raise DomainError("needs alpha > 1 and 0 < eps < 1")
    d = power_law(1.0, (1.0 - eps) / (alpha - 1.0), c0)
    return _renamed(d, f"no-characteristics-{eps:g}")


def ramp(c0: float = 1.0) -> InitialDatum:
    """Nondecreasing ``u0 = rho`` on ``[0, c0)`` with a cutoff at ``c0``."""
    M = 0.5 * c0 * c0
    return InitialDatum(
        total_mass=M,
        lipschitz_bound=c0,
        density=lambda r: np.where((np.asarray(r) >= 0) & (np.asarray(r) < c0), r, 0.0),
        cumulative=lambda r: 0.5 * np.clip(r, 0.0, c0) ** 2,
        support_end=c0,
        deficit=lambda r: M - 0.5 * np.clip(r, 0.0, c0) ** 2,
        edge_behavior=(c0, 1.0),
        monotone_cutoff=True,
        name="ramp",
    )


def piecewise_linear(knots: Sequence[float], values: Sequence[float],
                     name: str = "piecewise-linear") -> InitialDatum:
    """Density interpolating ``values`` at ``knots``, zero outside."""
    x = np.asarray(knots, float)
    y = np.asarray(values, float)
    if x.ndim != 1 or x.size < 2 or x.size != y.size:
        raise DomainError("need matching knot and value arrays of length >= 2")
    if x[0] < 0 or np.any(np.diff(x) <= 0) or np.any(y < 0):
        raise DomainError("knots must start at >= 0 and increase; values >= 0")
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(x))))
    M = float(cum[-1])

    def density(r):
        r = np.asarray(r, float)
        return np.where((r >= x[0]) & (r <= x[-1]), np.interp(r, x, y), 0.0)

    def cumulative(r):
        r = np.clip(np.asarray(r, float), x[0], x[-1])
        k = np.clip(np.searchsorted(x, r, side="right") - 1, 0, x.size - 2)
        dx = r - x[k]
        slope = (y[k + 1] - y[k]) / (x[k + 1] - x[k])
        return cum[k] + y[k] * dx + 0.5 * slope * dx * dx

    increasing = bool(np.all(np.diff(y) >= 0)) and x[0] == 0.0
    return InitialDatum(
        total_mass=M,
        lipschitz_bound=float(y.max()),
        density=density,
        cumulative=cumulative,
        support_end=float(x[-1]),
        monotone_cutoff=increasing,
        name=name,
    )


def two_bumps(gap: float = 0.5, width: float = 0.5, height: float = 1.0) -> InitialDatum:
    """Two plateaus of equal height separated by a gap."""
    if not (gap > 0 and width > 0 and height > 0):
        raise DomainError("two bumps need positive gap, width and height")
    a, b = width, width + gap
    return _plateaus(((0.0, a), (b, b + width)), height, "two-bumps")


def _plateaus(intervals, height: float, name: str) -> InitialDatum:
    iv = tuple((float(a), float(b)) for a, b in intervals)
    M = height * sum(b - a for a, b in iv)

    def density(r):
        r = np.asarray(r, float)
        out = np.zeros_like(r)
        for a, b in iv:
            out = np.where((r >= a) & (r < b), height, out)
        return out

    def cumulative(r):
        r = np.asarray(r, float)
        return sum(height * np.clip(r - a, 0.0, b - a) for a, b in iv)

    return InitialDatum(
        total_mass=M, lipschitz_bound=height, density=density, cumulative=cumulative,
        support_end=iv[-1][1], deficit=lambda r: M - cumulative(r),
        edge_behavior=(height, 1.0), name=name,
    )


def from_mass_samples(rho: Sequence[float], mass: Sequence[float],
                      name: str = "custom-samples") -> InitialDatum:
    """Piecewise-linear mass through the samples; ``L`` = max backward slope."""
    r = np.asarray(rho, float)
    m = np.asarray(mass, float)
    if r.ndim != 1 or r.size < 2 or r.size != m.size:
        raise DomainError("need matching rho and mass samples of length >= 2")
    if r[0] != 0.0 or m[0] != 0.0:
        raise DomainError("samples must start at rho = 0 with mass 0")
    if np.any(np.diff(r) <= 0):
        raise DomainError("rho samples must be strictly increasing")
    if np.any(np.diff(m) < 0):
        raise DomainError("mass samples must be nondecreasing")
    slopes = np.diff(m) / np.diff(r)
    M = float(m[-1])
    full = np.nonzero(m >= M)[0]
    c0 = float(r[full[0]])

    def density(x):
        x = np.asarray(x, float)
        k = np.searchsorted(r, x, side="right") - 1
        inside = (k >= 0) & (k < slopes.size)
        return np.where(inside, slopes[np.clip(k, 0, slopes.size - 1)], 0.0)

    return InitialDatum(
        total_mass=M,
        lipschitz_bound=float(slopes.max()) if slopes.size else 0.0,
        density=density,
        cumulative=lambda x: np.interp(x, r, m),
        support_end=c0,
        deficit=lambda x: M - np.interp(x, r, m),
        monotone_cutoff=bool(np.all(np.diff(slopes[: max(full[0], 1)]) >= 0)),
        name=name,
    )


def _renamed(d: InitialDatum, name: str) -> InitialDatum:
    return replace(d, name=name)


PRESETS = {
    "vortex": vortex,
    "delta": delta,
    "two-deltas": two_deltas,
    "power-beta": power_beta,
    "custom-samples": from_mass_samples,
}
