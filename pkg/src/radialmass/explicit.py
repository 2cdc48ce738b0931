"""Closed-form and semi-explicit solutions of ``m_t + m (m_rho)^alpha = 0``.

These serve as oracles for the scheme, as comparison functions in the
waiting-time analysis and as references for the long-time profile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .core import DomainError, ModelParams


def _require_superlinear(params: ModelParams, what: str) -> None:
    if params.alpha <= 1.0:
        raise DomainError(f"{what} requires alpha > 1")


def friendly_giant(C: float, t, params: ModelParams):
    """Spatially homogeneous density ``(C + alpha t)^(-1/alpha)``."""
    t = np.asarray(t, dtype=float)
    base = C + params.alpha * t
    if C < 0 or np.any(t < 0) or np.any(base <= 0):
        raise DomainError("friendly giant needs C >= 0, t >= 0 and C + alpha t > 0")
    out = base ** (-1.0 / params.alpha)
    return float(out) if out.ndim == 0 else out


def self_similar_profile(y, params: ModelParams):
    """``F(y) = (alpha + (omega_d y^d / alpha)^(-alpha/(alpha-1)))^(-1/alpha)``."""
    _require_superlinear(params, "the self-similar profile")
    a = params.alpha
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise DomainError("self-similar profile needs y >= 0")
    with np.errstate(divide="ignore"):
        inner = (params.omega_d * y ** params.dim / a) ** (-params.gamma)
    out = (a + inner) ** (-1.0 / a)
    return float(out) if out.ndim == 0 else out


def rescaled_limit(y):
    """Limit profile ``G(y) = min(max(y, 0), 1)`` of ``m / M`` in ``y = rho / (M (alpha t)^(1/alpha))``."""
    out = np.clip(np.asarray(y, dtype=float), 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class VortexParams:
    """Plateau of height ``u0`` carrying mass ``total_mass``."""

    u0: float
    total_mass: float

    def __post_init__(self) -> None:
        if not (self.u0 > 0 and self.total_mass > 0):
            raise DomainError("vortex parameters must be positive")

    @property
    def c0(self) -> float:
        return self.u0

    @property
    def plateau_length(self) -> float:
        return self.total_mass / self.u0

    def height(self, t, params: ModelParams):
        return friendly_giant(self.u0 ** (-params.alpha), t, params)

    def front(self, t, params: ModelParams):
        """Support edge ``M (u0^-alpha + alpha t)^(1/alpha)``."""
        return self.total_mass / self.height(t, params)


def vortex_density(t, rho, vp: VortexParams, params: ModelParams):
    h = vp.height(t, params)
    rho = np.asarray(rho, dtype=float)
    out = np.where(rho < vp.total_mass / h, h, 0.0) * np.ones(np.broadcast(rho, h).shape)
    return float(out) if out.ndim == 0 else out


def vortex_mass(t, rho, vp: VortexParams, params: ModelParams):
    h = vp.height(t, params)
    out = np.minimum(h * np.asarray(rho, dtype=float), vp.c0 * vp.plateau_length)
    return float(out) if np.ndim(out) == 0 else out


def ansatz_coefficient(params: ModelParams) -> float:
    """The constant making the Ansatz an exact solution: ``alpha^(-1/(alpha-1))``."""
    return params.alpha ** (-1.0 / (params.alpha - 1.0))


def ansatz_mass(t, rho, M: float, c0: float, T: float, params: ModelParams):
    """Waiting-time subsolution with support edge frozen at ``c0`` until ``T``.

    ``m = (M^g - c (c0 - rho)^g / (T - t)^(1/(alpha-1)))_+^(1/g)`` for
    ``rho < c0`` with ``g = alpha/(alpha-1)``, and ``M`` beyond ``c0``.
    It vanishes for ``rho <= c0 - alpha^(1/alpha) M (T - t)^(1/alpha)``.
    """
    _require_superlinear(params, "the Ansatz")
    t = np.asarray(t, dtype=float)
    if np.any(t >= T):
        raise DomainError("ansatz_mass is defined for t < T only")
    g = params.gamma
    x = np.clip(c0 - np.asarray(rho, dtype=float), 0.0, None)
    base = M ** g - ansatz_coefficient(params) * x ** g / (T - t) ** (1.0 / (params.alpha - 1.0))
    out = np.clip(base, 0.0, None) ** (1.0 / g)
    return float(out) if np.ndim(out) == 0 else out


def ansatz_edge(t, M: float, c0: float, T: float, params: ModelParams):
    """Left edge of the Ansatz support."""
    return c0 - params.alpha ** (1.0 / params.alpha) * M * (T - np.asarray(t, float)) ** (
        1.0 / params.alpha)


def delta_mass_solution(t, rho, M: float, c0: float, params: ModelParams):
    """Point mass ``M`` at ``c0``: ``M G((rho - c0)/(M (alpha t)^(1/alpha)))``."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("the delta solution is evaluated for t > 0; sample the datum instead")
    scale = M * (params.alpha * t) ** (1.0 / params.alpha)
    out = M * rescaled_limit((np.asarray(rho, dtype=float) - c0) / scale)
    return float(out) if np.ndim(out) == 0 else out


def _kappa_integrand(s: float, alpha: float, g: float) -> float:
    # (s^-g + alpha)^(-1/alpha) written without the singular power
    return s ** (1.0 / (alpha - 1.0)) * (1.0 + alpha * s ** g) ** (-1.0 / alpha)


def kappa(tau, params: ModelParams):
    """``K(tau) = int_0^tau (s^(-alpha/(alpha-1)) + alpha)^(-1/alpha) ds`` by quadrature."""
    _require_superlinear(params, "kappa")
    a, g = params.alpha, params.gamma
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise DomainError("kappa needs tau >= 0")

    def one(x: float) -> float:
        if x == 0.0:
            return 0.0
        return integrate.quad(_kappa_integrand, 0.0, x, args=(a, g),
                              epsabs=1e-13, epsrel=1e-13, limit=200)[0]

    out = np.vectorize(one, otypes=[float])(tau)
    return float(out) if out.ndim == 0 else out


def kappa_inverse(m, params: ModelParams):
    """Inverse of :func:`kappa` by bisection to relative tolerance 1e-10 or better."""
    _require_superlinear(params, "kappa_inverse")
    m = np.asarray(m, dtype=float)
    if np.any(m < 0):
        raise DomainError("kappa_inverse needs m >= 0")

    def one(target: float) -> float:
        if target == 0.0:
            return 0.0
        hi = 1.0
        while kappa(hi, params) < target:
            hi *= 2.0
        return optimize.bisect(lambda s: kappa(s, params) - target, 0.0, hi,
                               xtol=1e-300, rtol=1e-13, maxiter=500)

    out = np.vectorize(one, otypes=[float])(m)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class TwoDeltaParams:
    """Point masses ``m1`` at ``rho1`` and ``m2`` at ``rho2 > rho1``."""

    m1: float
    m2: float
    rho1: float
    rho2: float

    def __post_init__(self) -> None:
        if not (self.m1 > 0 and self.m2 > 0 and 0 <= self.rho1 < self.rho2):
            raise DomainError("two-delta data need m1, m2 > 0 and 0 <= rho1 < rho2")

    def t_valid(self, params: ModelParams) -> float:
        """Time at which the first shock reaches ``rho2``."""
        a = params.alpha
        return ((self.rho2 - self.rho1) / self.m1) ** a / a

    def s1(self, t, params: ModelParams):
        """First shock: the plateau of height ``(alpha t)^(-1/alpha)`` holds mass ``m1``."""
        return self.rho1 + self.m1 * (params.alpha * np.asarray(t, float)) ** (1.0 / params.alpha)

    def similarity_constant(self, params: ModelParams) -> float:
        return kappa_inverse(self.m2 / (params.alpha * self.m1), params)

    def s2(self, t, params: ModelParams, sigma: float | None = None):
        """Second shock ``rho2 + alpha m1 K^-1(m2/(alpha m1)) t^(1/alpha)``."""
        if sigma is None:
            sigma = self.similarity_constant(params)
        return self.rho2 + params.alpha * self.m1 * sigma * np.asarray(t, float) ** (
            1.0 / params.alpha)


def _fan_density(t, rho, p: TwoDeltaParams, params: ModelParams):
    """Rarefaction density ``(((rho - rho2)/(alpha m1 t))^(-g) + alpha t)^(-1/alpha)``."""
    a, g = params.alpha, params.gamma
    x = np.clip(np.asarray(rho, float) - p.rho2, 0.0, None) / (a * p.m1)
    with np.errstate(divide="ignore"):
        return ((x / t) ** (-g) + a * t) ** (-1.0 / a)


def two_deltas_solution(t: float, rho, p: TwoDeltaParams, params: ModelParams):
    """Density and both shock positions for ``0 < t < T_valid``.

    Returns ``(u, S1, S2)``. ``u`` is the plateau ``(alpha t)^(-1/alpha)`` on
    ``[rho1, S1]``, the rarefaction fan on ``[rho2, S2]`` and zero elsewhere.
    """
    _require_superlinear(params, "the two-delta solution")
    if not 0 < t < p.t_valid(params):
        raise DomainError(f"t={t} outside (0, T_valid={p.t_valid(params)})")
    a = params.alpha
    S1 = float(p.s1(t, params))
    S2 = float(p.s2(t, params))
    rho = np.asarray(rho, dtype=float)
    plateau = (a * t) ** (-1.0 / a)
    u = np.where((rho >= p.rho1) & (rho <= S1), plateau, 0.0)
    fan = (rho > p.rho2) & (rho <= S2)
    u = np.where(fan, _fan_density(t, np.where(fan, rho, p.rho2 + 1.0), p, params), u)
    return (float(u) if u.ndim == 0 else u), S1, S2


def two_deltas_mass(t: float, rho, p: TwoDeltaParams, params: ModelParams):
    """Mass function of the two-delta solution (same validity range)."""
    _require_superlinear(params, "the two-delta solution")
    if not 0 < t < p.t_valid(params):
        raise DomainError(f"t={t} outside (0, T_valid={p.t_valid(params)})")
    a = params.alpha
    sigma = p.similarity_constant(params)
    S1, S2 = float(p.s1(t, params)), float(p.s2(t, params, sigma))
    rho = np.asarray(rho, dtype=float)
    scale = a * p.m1 * t ** (1.0 / a)
    first = np.clip(rho - p.rho1, 0.0, S1 - p.rho1) * (a * t) ** (-1.0 / a)
    tau = np.clip(rho - p.rho2, 0.0, S2 - p.rho2) / scale
    second = a * p.m1 * _kappa_closed(tau, params)
    out = np.minimum(first, p.m1) + np.where(rho >= S2, p.m2, np.minimum(second, p.m2))
    return float(out) if out.ndim == 0 else out


def _kappa_closed(tau, params: ModelParams):
    # Antiderivative of the kappa integrand: ((1 + alpha s^g)^(1/g) - 1)/alpha.
    a, g = params.alpha, params.gamma
    tau = np.asarray(tau, dtype=float)
    return np.expm1(np.log1p(a * tau ** g) / g) / a


def rh_fixed_point(p: TwoDeltaParams, params: ModelParams) -> float:
    """Similarity constant from the shock ODE alone.

    Self-similar fronts ``S2 = rho2 + alpha m1 s t^(1/alpha)`` solve the
    Rankine-Hugoniot equation iff ``m1 s = (m1 + m2)(s^-g + alpha)^(-1/g)``.
    """
    a, g = params.alpha, params.gamma
    total = p.m1 + p.m2
    # divided by s: (s^-g + alpha)^(-1/g) = s (1 + alpha s^g)^(-1/g)
    f = lambda s: p.m1 - total * (1.0 + a * s ** g) ** (-1.0 / g)
    hi = 1.0
    while f(hi) < 0:
        hi *= 2.0
    return optimize.bisect(f, 0.0, hi, xtol=1e-300, rtol=1e-14, maxiter=2000)
