"""Ground truth independent of the solver.

Barenblatt pressure profiles, manufactured solutions with their forcing,
and observed convergence orders.  Nothing here imports the integrator.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, OracleGateError, UsageError
from .families import PmeParameters
from .geometry import ManifoldModel

GATE_TOL = 1e-6


def _similarity_exponent(m: float, n: int) -> float:
    return n / (n * (m - 1.0) + 2.0)


def barenblatt_pressure(x, t: float, m: float, n: int = 1, b: float = 1.0):
    """Pressure of the Barenblatt source solution.

    v(x, t) = max(0, t^(-k(m-1)) (b - k/(2n) |x|^2 t^(-2k/n))),
    k = n / (n(m-1) + 2).  Inside the support ``Lap v = -k/t`` exactly.
    """
    if not t > 0:
        raise DomainError(f"Barenblatt profile needs t > 0, got {t}")
    if n != 1:
        raise UsageError("only the one-dimensional Barenblatt profile is supported")
    k = _similarity_exponent(m, n)
    x = np.asarray(x, dtype=float)
    v = t ** (-k * (m - 1.0)) * (b - k / (2.0 * n) * x**2 * t ** (-2.0 * k / n))
    v = np.maximum(v, 0.0)
    return float(v) if v.ndim == 0 else v


def barenblatt_support_radius(t: float, m: float, n: int = 1, b: float = 1.0) -> float:
    k = _similarity_exponent(m, n)
    return math.sqrt(2.0 * n * b / k) * t ** (k / n)


def barenblatt_laplacian(t: float, m: float, n: int = 1) -> float:
    """Spatially constant Laplacian of the pressure inside the support."""
    return -_similarity_exponent(m, n) / t


def barenblatt_residual(x, t: float, m: float, n: int = 1, b: float = 1.0,
                        delta: float = 1e-3) -> np.ndarray:
    """Pressure-equation residual of the profile by centred differences.

    First derivatives use one Richardson step, so truncation is O(delta^4).
    """
    x = np.asarray(x, dtype=float)
    f = lambda xx, tt: barenblatt_pressure(xx, tt, m, n, b)

    def rich(d):
        return (4.0 * d(0.5 * delta) - d(delta)) / 3.0

    v = f(x, t)
    v_t = rich(lambda d: (f(x, t + d) - f(x, t - d)) / (2.0 * d))
    v_x = rich(lambda d: (f(x + d, t) - f(x - d, t)) / (2.0 * d))
    v_xx = rich(lambda d: (f(x + d, t) - 2.0 * v + f(x - d, t)) / d**2)
    return v_t - (m - 1.0) * v * v_xx - v_x**2


def barenblatt_gate(m: float = 2.0, n: int = 1, b: float = 1.0, t_range=(0.5, 4.0),
                    samples: int = 100, seed: int = 0, tol: float = GATE_TOL) -> float:
    """Self-validation of the Barenblatt formula against the pressure equation.

    Samples random points strictly inside the support and raises
    :class:`OracleGateError` if the residual exceeds ``tol``.  Returns the
    largest residual seen.
    """
    rng = np.random.default_rng(seed)
    t = rng.uniform(*t_range, size=samples)
    r = np.array([barenblatt_support_radius(tt, m, n, b) for tt in t])
    x = rng.uniform(-0.9, 0.9, size=samples) * r
    res = np.array([barenblatt_residual(xx, tt, m, n, b) for xx, tt in zip(x, t)])
    worst = float(np.max(np.abs(res)))
    if not worst <= tol:
        raise OracleGateError(f"Barenblatt residual {worst:.3e} exceeds {tol:.1e}")
    return worst


@dataclass(frozen=True)
class ManufacturedSolution:
    """Closed-form target v*(x, t) with coordinate derivatives.

    On the sphere ``x`` is the colatitude and the target must be even about
    both poles.
    """

    name: str
    value: Callable
    d_t: Callable
    d_x: Callable
    d_xx: Callable

    @classmethod
    def constant(cls, c: float = 2.0) -> "ManufacturedSolution":
        zero = lambda x, t: np.zeros_like(np.asarray(x, dtype=float))
        return cls(f"constant({c})", lambda x, t: np.full_like(np.asarray(x, dtype=float), c),
                   zero, zero, zero)

    @classmethod
    def sine(cls, c: float = 2.0, a: float = 1.0) -> "ManufacturedSolution":
        """c + a e^(-t) sin x (flat circle of length 2 pi)."""
        return cls(
            f"{c}+{a}exp(-t)sin(x)",
            lambda x, t: c + a * math.exp(-t) * np.sin(x),
            lambda x, t: -a * math.exp(-t) * np.sin(x),
            lambda x, t: a * math.exp(-t) * np.cos(x),
            lambda x, t: -a * math.exp(-t) * np.sin(x),
        )

    @classmethod
    def polar_cosine(cls, c: float = 2.0, a: float = 1.0) -> "ManufacturedSolution":
        """c + a e^(-t) cos(theta) (sphere)."""
        return cls(
            f"{c}+{a}exp(-t)cos(theta)",
            lambda x, t: c + a * math.exp(-t) * np.cos(x),
            lambda x, t: -a * math.exp(-t) * np.cos(x),
            lambda x, t: -a * math.exp(-t) * np.sin(x),
            lambda x, t: -a * math.exp(-t) * np.cos(x),
        )


def exact_operators(target: ManufacturedSolution, model: ManifoldModel, x, t: float):
    """Analytic (v, v_t, Lap v, |grad v|^2) of the target in the metric g(t)."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(target.value(x, t), dtype=float)
    vx = np.asarray(target.d_x(x, t), dtype=float)
    vxx = np.asarray(target.d_xx(x, t), dtype=float)
    vt = np.asarray(target.d_t(x, t), dtype=float)
    s = model.metric_scale(t)
    if model.is_flat:
        lap = vxx
    else:
        sin = np.sin(x)
        pole = np.abs(sin) < 1e-12
        with np.errstate(divide="ignore", invalid="ignore"):
            lap = np.where(pole, 2.0 * vxx, vxx + np.cos(x) * vx / np.where(pole, 1.0, sin)) / s
    return v, vt, lap, vx * vx / s


def mms_forcing(target: ManufacturedSolution, model: ManifoldModel, pme: PmeParameters):
    """Forcing that makes ``target`` an exact solution of the forced pressure equation."""
    m = pme.m

    def forcing(x, t):
        v, vt, lap, grad2 = exact_operators(target, model, x, t)
        if np.any(v <= 0):
            raise DomainError(f"manufactured solution {target.name} is not positive at t = {t}")
        return vt - (m - 1.0) * v * lap - grad2

    return forcing


@dataclass
class ConvergenceTable:
    """Errors at successive resolutions and the observed orders between them."""

    resolutions: list[float]
    errors: list[float]
    orders: list[float] = field(default_factory=list)
    warning: bool = False

    @property
    def median_order(self) -> float:
        return float(np.median(self.orders))

    def rows(self):
        yield self.resolutions[0], self.errors[0], math.nan
        yield from zip(self.resolutions[1:], self.errors[1:], self.orders)

    def to_dict(self) -> dict:
        return {"resolutions": list(self.resolutions), "errors": list(self.errors),
                "orders": list(self.orders), "median_order": self.median_order,
                "warning": self.warning}


def convergence_order(errors: Sequence[float], resolutions: Sequence[float] | None = None
                      ) -> ConvergenceTable:
    """Pairwise observed orders ``log(e_i / e_{i+1}) / log(N_{i+1} / N_i)``.

    Without ``resolutions`` the grid is assumed to double each time.
    """
    errors = [float(e) for e in errors]
    if len(errors) < 3:
        raise UsageError("convergence order needs at least three resolutions")
    if resolutions is None:
        resolutions = [2.0**i for i in range(len(errors))]
    resolutions = [float(r) for r in resolutions]
    if len(resolutions) != len(errors) or any(b <= a for a, b in zip(resolutions, resolutions[1:])):
        raise UsageError("resolutions must be increasing and match the errors")
    if any(not e > 0 for e in errors):
        raise UsageError("errors must be positive")
    orders = [math.log(e0 / e1) / math.log(n1 / n0)
              for e0, e1, n0, n1 in zip(errors, errors[1:], resolutions, resolutions[1:])]
    table = ConvergenceTable(resolutions, errors, orders)
    if any(e1 >= e0 for e0, e1 in zip(errors, errors[1:])):
        table.warning = True
        warnings.warn("errors do not decrease under refinement", RuntimeWarning, stacklevel=2)
    return table


def barenblatt_interior(x, t: float, m: float, n: int = 1, b: float = 1.0,
                        fraction: float = 0.5) -> np.ndarray:
    """Points within ``fraction`` of the support radius (the well-resolved core)."""
    if not 0 < fraction < 1:
        raise UsageError(f"fraction must lie in (0, 1), got {fraction}")
    return np.abs(np.asarray(x, dtype=float)) <= fraction * barenblatt_support_radius(t, m, n, b)
