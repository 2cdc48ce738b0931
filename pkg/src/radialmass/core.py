"""Shared domain types: model parameters, initial data, grids and profiles.

The unknown throughout the package is the mass function ``m(t, rho)`` in the
volume coordinate ``rho``. A grid stores ``M_j^n ~ m(t_n, rho_j)`` with
``rho_j = j * h_rho`` and ``t_n = n * h_t``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate

ArrayFunc = Callable[[np.ndarray], np.ndarray]

#: Composite trapezoid sub-points per cell when no antiderivative is known.
SUBPOINTS_PER_CELL = 8


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class CFLError(DomainError):
    """Time step incompatible with the monotonicity (CFL) condition."""


def unit_ball_volume(dim: int) -> float:
    """Volume of the unit ball in ``dim`` dimensions."""
    return math.pi ** (dim / 2.0) / math.gamma(dim / 2.0 + 1.0)


@dataclass(frozen=True)
class ModelParams:
    """Mobility exponent and geometric constants.

    ``omega_d`` defaults to the unit-ball volume of dimension ``dim``.
    """

    alpha: float
    dim: int = 1
    omega_d: Optional[float] = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.alpha) or self.alpha < 1.0:
            raise DomainError(
                f"alpha={self.alpha!r} is out of scope: only alpha >= 1 is supported"
            )
        if int(self.dim) != self.dim or self.dim < 1:
            raise DomainError(f"dim must be a positive integer, got {self.dim!r}")
        if self.omega_d is None:
            object.__setattr__(self, "omega_d", unit_ball_volume(int(self.dim)))
        elif not self.omega_d > 0:
            raise DomainError(f"omega_d must be positive, got {self.omega_d!r}")

    @property
    def gamma(self) -> float:
        """Critical exponent alpha/(alpha-1); infinite when alpha = 1."""
        if self.alpha == 1.0:
            return math.inf
        return self.alpha / (self.alpha - 1.0)


@dataclass(frozen=True)
class InitialDatum:
    """A nonnegative finite measure on [0, inf): density part plus point masses.

    Attributes:
        total_mass: ``M = m0(inf)``.
        lipschitz_bound: upper bound for the sup of the density part.
        density: vectorized ``u0(rho)``; ``None`` means no density part.
        cumulative: vectorized antiderivative ``int_0^rho u0``, if known.
        deltas: ``(location, mass)`` pairs.
        support_end: right end of the density support (``inf`` if unbounded).
        deficit: closed form of ``M - m0(rho)`` near the support edge, used
            to avoid cancellation in waiting-time analysis.
        edge_behavior: ``(K, p)`` with ``M - m0(rho) = K (c0 - rho)^p`` near
            the edge, when known analytically.
        monotone_cutoff: the density is nondecreasing on ``[0, c0)`` and
            vanishes beyond ``c0``.
        name: identifier used in reports.
    """

    total_mass: float
    lipschitz_bound: float
    density: Optional[ArrayFunc] = None
    cumulative: Optional[ArrayFunc] = None
    deltas: tuple = ()
    support_end: float = math.inf
    deficit: Optional[ArrayFunc] = None
    edge_behavior: Optional[tuple] = None
    monotone_cutoff: bool = False
    name: str = "custom"

    def __post_init__(self) -> None:
        deltas = tuple((float(r), float(m)) for r, m in self.deltas)
        object.__setattr__(self, "deltas", tuple(sorted(deltas)))
        for r, m in self.deltas:
            if r < 0 or not m > 0:
                raise DomainError(f"invalid delta (location={r}, mass={m})")
        if self.total_mass < 0 or not math.isfinite(self.total_mass):
            raise DomainError(f"total mass must be finite and >= 0, got {self.total_mass}")
        if self.lipschitz_bound < 0:
            raise DomainError("lipschitz_bound must be >= 0")
        if self.density is None and not self.deltas and self.total_mass > 0:
            raise DomainError("positive total mass but neither density nor deltas")

    @property
    def c0(self) -> float:
        """Right end of the support of the measure."""
        ends = [r for r, _ in self.deltas]
        if self.density is not None:
            ends.append(self.support_end)
        return max(ends) if ends else 0.0

    def u0(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        if self.density is None:
            return np.zeros_like(rho)
        return np.asarray(self.density(rho), dtype=float) * np.ones_like(rho)

    def density_mass(self, rho) -> np.ndarray:
        """``int_0^rho u0`` for the density part only."""
        rho = np.asarray(rho, dtype=float)
        if self.density is None:
            return np.zeros_like(rho)
        if self.cumulative is not None:
            return np.asarray(self.cumulative(rho), dtype=float) * np.ones_like(rho)
        f = lambda s: float(self.density(np.asarray(s)))
        out = [integrate.quad(f, 0.0, float(r), limit=200)[0] if r > 0 else 0.0
               for r in rho.ravel()]
        return np.asarray(out).reshape(rho.shape)

    def mass(self, rho) -> np.ndarray:
        """Right-continuous mass function ``m0(rho)``."""
        rho = np.asarray(rho, dtype=float)
        out = self.density_mass(rho)
        for r, m in self.deltas:
            out = out + np.where(rho >= r, m, 0.0)
        return out

    def mass_deficit(self, rho) -> np.ndarray:
        """``M - m0(rho)``, using the closed form when available."""
        rho = np.asarray(rho, dtype=float)
        if self.deficit is not None and not self.deltas:
            return np.asarray(self.deficit(rho), dtype=float) * np.ones_like(rho)
        return self.total_mass - self.mass(rho)


@dataclass(frozen=True)
class Grid:
    """Uniform space-time grid.

    ``lipschitz`` and ``mass`` are the constants ``L`` and ``M`` the time
    step was derived from; ``lipschitz`` also serves as the cut-off of the
    Hamiltonian.
    """

    h_rho: float
    h_t: float
    n_space: int
    n_time: int
    lipschitz: float
    mass: float
    alpha: float
    trivial: bool = False

    def __post_init__(self) -> None:
        if not (self.h_rho > 0 and self.h_t > 0):
            raise DomainError("grid steps must be positive")
        if self.n_space < 1 or self.n_time < 0:
            raise DomainError("grid sizes must be positive")
        if not self.trivial and cfl_number(self.h_rho, self.h_t, self.lipschitz,
                                           self.mass, self.alpha) > 0.5:
            raise CFLError(
                f"h_t/h_rho = {self.h_t / self.h_rho:.6g} exceeds the monotonicity bound "
                f"{max_time_ratio(self.lipschitz, self.mass, self.alpha):.6g}"
            )

    @property
    def rho(self) -> np.ndarray:
        return np.arange(self.n_space + 1) * self.h_rho

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_time + 1) * self.h_t

    @property
    def domain_length(self) -> float:
        return self.n_space * self.h_rho

    @property
    def t_final(self) -> float:
        return self.n_time * self.h_t

    def with_time_steps(self, n_time: int) -> "Grid":
        return Grid(self.h_rho, self.h_t, self.n_space, n_time, self.lipschitz,
                    self.mass, self.alpha, self.trivial)


def cfl_number(h_rho: float, h_t: float, lipschitz: float, mass: float,
               alpha: float) -> float:
    """``h_t/h_rho * alpha * L^(alpha-1) * M``; must not exceed 1/2."""
    return (h_t / h_rho) * alpha * lipschitz ** (alpha - 1.0) * mass


def max_time_ratio(lipschitz: float, mass: float, alpha: float) -> float:
    denom = 2.0 * alpha * lipschitz ** (alpha - 1.0) * mass
    return math.inf if denom == 0 else 1.0 / denom


@dataclass(frozen=True)
class MassProfile:
    """Nodal values ``M_j`` at time level ``time_index``."""

    values: np.ndarray
    time_index: int = 0

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise DomainError("a mass profile needs at least two nodes")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def violations(self, total_mass: Optional[float] = None) -> list:
        """List of broken profile invariants (empty when valid)."""
        v = self.values
        out = []
        if v[0] != 0.0:
            out.append(f"M_0 = {v[0]!r} != 0")
        if np.any(np.diff(v) < 0):
            out.append("profile is not nondecreasing")
        if total_mass is not None and v[-1] > total_mass:
            out.append(f"M_J = {v[-1]!r} exceeds total mass {total_mass!r}")
        return out


@dataclass(frozen=True)
class Trajectory:
    """Stored time levels of a scheme run.

    ``values[k]`` holds the profile at step ``steps[k]``.
    """

    values: np.ndarray
    steps: np.ndarray
    grid: Grid
    params: ModelParams

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        steps = np.array(self.steps, dtype=int)
        if values.ndim != 2 or values.shape[0] != steps.size:
            raise DomainError("values must be (n_stored, J+1) matching steps")
        if np.any(np.diff(steps) <= 0):
            raise DomainError("stored steps must be strictly increasing")
        values.setflags(write=False)
        steps.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "steps", steps)

    @property
    def times(self) -> np.ndarray:
        return self.steps * self.grid.h_t

    @property
    def rho(self) -> np.ndarray:
        return self.grid.rho

    @property
    def total_mass(self) -> float:
        return float(self.values[0, -1])

    @property
    def profiles(self) -> list:
        return [MassProfile(v, int(n)) for v, n in zip(self.values, self.steps)]

    def profile_at_step(self, n: int) -> MassProfile:
        idx = np.searchsorted(self.steps, n)
        if idx >= self.steps.size or self.steps[idx] != n:
            raise KeyError(f"step {n} was not stored")
        return MassProfile(self.values[idx], int(n))

    def nearest_index(self, t: float) -> int:
        return int(np.argmin(np.abs(self.times - t)))


def _sample_values(datum: InitialDatum, h_rho: float, n_space: int) -> np.ndarray:
    rho = np.arange(n_space + 1) * h_rho
    if datum.density is None:
        values = np.zeros(n_space + 1)
    elif datum.cumulative is not None:
        values = np.asarray(datum.cumulative(rho), dtype=float) * np.ones_like(rho)
    else:
        sub = SUBPOINTS_PER_CELL
        fine = np.arange(n_space * sub + 1) * (h_rho / sub)
        f = np.asarray(datum.density(fine), dtype=float) * np.ones_like(fine)
        cells = (0.5 * (f[:-1] + f[1:]) * (h_rho / sub)).reshape(n_space, sub).sum(axis=1)
        values = np.concatenate(([0.0], np.cumsum(cells)))
    values[0] = 0.0
    for r, m in datum.deltas:
        j = max(1, int(math.ceil(r / h_rho - 1e-12)))
        if j > n_space:
            raise DomainError(f"delta at rho={r} lies beyond the domain {n_space * h_rho}")
        values[j:] += m
    return np.maximum.accumulate(values)


def _discrete_lipschitz(values: np.ndarray, h_rho: float) -> float:
    return float(np.max(np.diff(values)) / h_rho) if values.size > 1 else 0.0


def build_grid(datum: InitialDatum, params: ModelParams, h_rho: float,
               t_final: float, domain_length: float,
               cfl_fraction: float = 1.0) -> Grid:
    """Grid with the largest CFL-admissible time step (times ``cfl_fraction``).

    With point masses the constant ``L`` is the largest backward difference
    of the sampled mass, so ``h_t`` scales like ``h_rho^alpha``.
    """
    if not (h_rho > 0 and t_final > 0 and domain_length > 0):
        raise DomainError("h_rho, t_final and domain_length must be positive")
    if not 0 < cfl_fraction <= 1:
        raise DomainError("cfl_fraction must lie in (0, 1]")
    alpha = params.alpha
    n_space = int(math.ceil(domain_length / h_rho - 1e-9))
    values = _sample_values(datum, h_rho, n_space)
    mass = float(values[-1])
    lip = max(datum.lipschitz_bound if not datum.deltas else 0.0,
              _discrete_lipschitz(values, h_rho))
    if mass == 0.0 or lip == 0.0:
        n_time = int(math.ceil(t_final / h_rho - 1e-9))
        return Grid(h_rho, h_rho, n_space, n_time, lip, mass, alpha, trivial=True)
    h_t = cfl_fraction * h_rho / (2.0 * alpha * lip ** (alpha - 1.0) * mass)
    while cfl_number(h_rho, h_t, lip, mass, alpha) > 0.5:
        h_t = np.nextafter(h_t, 0.0)
    n_time = int(math.ceil(t_final / h_t - 1e-9))
    grid = Grid(h_rho, float(h_t), n_space, n_time, lip, mass, alpha)
    reach = datum.c0 + mass * (alpha * grid.t_final) ** (1.0 / alpha)
    if not grid.domain_length > reach:
        warnings.warn(
            f"domain length {grid.domain_length:.6g} does not exceed the predicted "
            f"support radius {reach:.6g} at t={grid.t_final:.6g}",
            RuntimeWarning,
            stacklevel=2,
        )
    return grid


def sample_initial_mass(datum: InitialDatum, grid: Grid) -> MassProfile:
    """``M_j^0 = m0(rho_j)`` with point masses included at their node."""
    return MassProfile(_sample_values(datum, grid.h_rho, grid.n_space), 0)


def density_from_mass(profile: MassProfile | np.ndarray, grid: Grid) -> np.ndarray:
    """Backward differences ``U_j = (M_j - M_{j-1})/h_rho`` with ``U_0 = 0``."""
    v = profile.values if isinstance(profile, MassProfile) else np.asarray(profile, float)
    u = np.empty_like(v)
    u[0] = 0.0
    u[1:] = (v[1:] - v[:-1]) / grid.h_rho
    return u


def mass_from_density(u: Sequence[float], h_rho: float) -> np.ndarray:
    """Left-to-right cumulative sum times ``h_rho`` (inverse of the above)."""
    u = np.asarray(u, dtype=float)
    return np.concatenate(([0.0], np.cumsum(u[1:] * h_rho)))
