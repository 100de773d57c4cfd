"""Background geometries with closed-form Ricci flow.

Three models are supported, all discretised on a 1-D grid:

* ``circle`` -- flat circle of length ``L`` (n = 1), static under the flow;
* ``torus`` -- flat 2-torus with fields varying along one coordinate
  (n = 2), numerically identical to the circle;
* ``sphere`` -- round 2-sphere with latitude-symmetric fields.  Under
  ``d/dt g = -2 Ric`` the metric is ``g(t) = (r0^2 - 2t) g_unit``.

The sphere Laplacian is written in conservative (finite-volume) form on
the colatitude grid ``theta_i = i*pi/(N-1)``; at the poles it reduces to
``4 (f_1 - f_0) / (h^2 s)``, the reflected-ghost stencil for
``2 f_thth / s``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ExtinctionError, GeometryError, InstabilityError, UsageError

MIN_POINTS = 16


class ModelKind(str, enum.Enum):
    FLAT_CIRCLE = "circle"
    FLAT_TORUS = "torus"
    SPHERE = "sphere"


@dataclass(frozen=True)
class GridSpec:
    N: int
    start: float
    length: float
    periodic: bool

    @property
    def h(self) -> float:
        return self.length / (self.N if self.periodic else self.N - 1)

    @property
    def coords(self) -> np.ndarray:
        return self.start + self.h * np.arange(self.N)


@dataclass(frozen=True)
class ManifoldModel:
    """A latitude- or translation-symmetric closed manifold on a 1-D grid."""

    kind: ModelKind
    N: int
    L: float = 2.0 * math.pi
    r0: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if int(self.N) != self.N or self.N < MIN_POINTS:
            raise UsageError(f"grid needs N >= {MIN_POINTS} points, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        if self.is_flat and not self.L > 0:
            raise UsageError(f"circle length must be positive, got {self.L}")
        if not self.is_flat and not self.r0 > 0:
            raise UsageError(f"sphere radius must be positive, got {self.r0}")

    @classmethod
    def circle(cls, N: int, L: float = 2.0 * math.pi) -> "ManifoldModel":
        return cls(ModelKind.FLAT_CIRCLE, N, L=L)

    @classmethod
    def torus(cls, N: int, L: float = 2.0 * math.pi) -> "ManifoldModel":
        return cls(ModelKind.FLAT_TORUS, N, L=L)

    @classmethod
    def sphere(cls, N: int, r0: float = 1.0) -> "ManifoldModel":
        return cls(ModelKind.SPHERE, N, r0=r0)

    @property
    def is_flat(self) -> bool:
        return self.kind is not ModelKind.SPHERE

    @property
    def n(self) -> int:
        return 1 if self.kind is ModelKind.FLAT_CIRCLE else 2

    @cached_property
    def grid(self) -> GridSpec:
        if self.is_flat:
            return GridSpec(self.N, 0.0, self.L, True)
        return GridSpec(self.N, 0.0, math.pi, False)

    @property
    def h(self) -> float:
        return self.grid.h

    @cached_property
    def coords(self) -> np.ndarray:
        return self.grid.coords

    @property
    def extinction_time(self) -> float:
        return math.inf if self.is_flat else 0.5 * self.r0**2

    def metric_scale(self, t: float) -> float:
        """Conformal factor s(t) of g(t) relative to the reference metric."""
        if self.is_flat:
            return 1.0
        s = self.r0**2 - 2.0 * t
        if s <= 0:
            raise ExtinctionError(
                f"sphere of radius {self.r0} is extinct at t = {self.extinction_time}; got t = {t}"
            )
        return s

    def interior_mask(self, width: int = 3) -> np.ndarray:
        """Points at least ``width`` grid spacings away from the poles."""
        mask = np.ones(self.N, dtype=bool)
        if not self.is_flat:
            mask[:width] = False
            mask[self.N - width:] = False
        return mask

    # sphere finite-volume coefficients
    @cached_property
    def _half_sin(self) -> np.ndarray:
        return np.sin(self.coords[:-1] + 0.5 * self.h)

    @cached_property
    def _cell_area(self) -> np.ndarray:
        th, h = self.coords, self.h
        area = 2.0 * np.sin(th) * math.sin(0.5 * h)
        area[0] = area[-1] = 1.0 - math.cos(0.5 * h)
        return area

    def describe(self) -> dict:
        d = {"kind": self.kind.value, "N": self.N, "n": self.n}
        if self.is_flat:
            d["L"] = self.L
        else:
            d["r0"] = self.r0
        return d


def ricci_bound(model: ManifoldModel, t: float) -> float:
    """Largest |Ric| eigenvalue w.r.t. g(t): 0 when flat, 1/s(t) on the sphere."""
    if model.is_flat:
        return 0.0
    return 1.0 / model.metric_scale(t)


def run_ricci_bound(model: ManifoldModel, T: float) -> float:
    """sup of :func:`ricci_bound` over [0, T] (monotone, so attained at T)."""
    return ricci_bound(model, T)


def _checked(model: ManifoldModel, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (model.N,):
        raise UsageError(f"field has shape {f.shape}, model grid has {model.N} points")
    if not np.all(np.isfinite(f)):
        raise InstabilityError("non-finite values in field")
    return f


def laplacian(model: ManifoldModel, f, t: float = 0.0) -> np.ndarray:
    """Laplace-Beltrami operator of g(t) applied to a grid field."""
    f = _checked(model, f)
    h = model.h
    if model.is_flat:
        return (np.roll(f, -1) - 2.0 * f + np.roll(f, 1)) / h**2
    s = model.metric_scale(t)
    flux = model._half_sin * np.diff(f) / h
    div = np.empty_like(f)
    div[0] = flux[0]
    div[-1] = -flux[-1]
    div[1:-1] = flux[1:] - flux[:-1]
    return div / (model._cell_area * s)


def coordinate_gradient(model: ManifoldModel, f) -> np.ndarray:
    """Central difference d f / d(coordinate); zero at the poles by symmetry."""
    f = _checked(model, f)
    h = model.h
    if model.is_flat:
        return (np.roll(f, -1) - np.roll(f, 1)) / (2.0 * h)
    g = np.zeros_like(f)
    g[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
    return g


def gradient_dot(model: ManifoldModel, f, g, t: float = 0.0) -> np.ndarray:
    """<grad f, grad g> in the metric g(t)."""
    return coordinate_gradient(model, f) * coordinate_gradient(model, g) / model.metric_scale(t)


def gradient_sq(model: ManifoldModel, f, t: float = 0.0) -> np.ndarray:
    """|grad f|^2 in the metric g(t)."""
    d = coordinate_gradient(model, f)
    return d * d / model.metric_scale(t)


def volume_weights(model: ManifoldModel, t: float = 0.0) -> np.ndarray:
    """Discrete volume element per node, consistent with :func:`laplacian`."""
    if model.is_flat:
        return np.full(model.N, model.h)
    s = model.metric_scale(t)
    return 2.0 * math.pi * s * model._cell_area


def distance(model: ManifoldModel, x, x0, t: float = 0.0):
    """Geodesic distance in g(t).

    On the sphere only pole-centred distances are available (``x0`` must
    be 0 or pi), where the distance is ``sqrt(s(t)) |theta - theta0|``.
    """
    x = np.asarray(x, dtype=float)
    if model.is_flat:
        d = np.abs(x - x0) % model.L
        out = np.minimum(d, model.L - d)
    else:
        if not (x0 == 0.0 or x0 == math.pi):
            raise GeometryError("sphere distances are defined from a pole only")
        out = math.sqrt(model.metric_scale(t)) * np.abs(x - x0)
    return float(out) if out.ndim == 0 else out


def injectivity_scale(model: ManifoldModel, t: float = 0.0) -> float:
    """Largest radius of a ball about the centre that stays embedded."""
    if model.is_flat:
        return 0.5 * model.L
    return math.sqrt(model.metric_scale(t)) * math.pi
