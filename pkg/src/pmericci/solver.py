"""Explicit integrator for the pressure form of the porous medium equation.

With ``v = m/(m-1) u^(m-1)`` the equation ``u_t = Lap u^m`` becomes

    v_t = (m - 1) v Lap_g(t) v + |grad v|^2_g(t)  (+ forcing),

which is advanced by forward Euler with a step bounded by
``safety * h^2 s(t) / ((m-1) max v)``.  For resolved positive data the
update is a monotone scheme, so the discrete maximum principle holds and
``max v0`` bounds the whole trajectory.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import geometry as geo
from .errors import (DomainError, ExtinctionError, InstabilityError,
                     PositivityLossError, UsageError)
from .families import FlowEnv, PmeParameters
from .geometry import ManifoldModel

Forcing = Callable[[np.ndarray, float], np.ndarray]

DT_EPS = 1e-30
DEFAULT_SAFETY = 0.2


@dataclass(frozen=True)
class PressureField:
    """Grid pressure at one time; the value array is read-only."""

    values: np.ndarray
    t: float
    model: ManifoldModel

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.model.N,):
            raise UsageError(f"field has shape {vals.shape}, model grid has {self.model.N} points")
        if not np.all(np.isfinite(vals)):
            raise InstabilityError(f"non-finite pressure at t = {self.t}")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "t", float(self.t))


@dataclass
class RunTrace:
    """Snapshots of one integration together with its step history."""

    model: ManifoldModel
    pme: PmeParameters
    env: FlowEnv
    snapshots: list[PressureField]
    dt_history: np.ndarray
    step_max: np.ndarray
    step_min: np.ndarray
    degenerate: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    @property
    def values(self) -> np.ndarray:
        return np.stack([s.values for s in self.snapshots])

    def at(self, t: float) -> PressureField:
        for s in self.snapshots:
            if math.isclose(s.t, t, rel_tol=1e-12, abs_tol=1e-14):
                return s
        raise KeyError(f"no snapshot at t = {t}")

    def write_csv(self, path: str | Path) -> None:
        """Long-format ``t,x,v`` table."""
        x = self.model.coords
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "x", "v"])
            for snap in self.snapshots:
                for xi, vi in zip(x, snap.values):
                    w.writerow([repr(snap.t), repr(float(xi)), repr(float(vi))])


def to_pressure(u, m: float) -> np.ndarray:
    """v = m/(m-1) u^(m-1) for positive density u."""
    if m <= 1:
        raise DomainError(f"exponent m must be > 1, got {m}")
    u = np.asarray(u, dtype=float)
    if np.any(~(u > 0)):
        raise DomainError("density must be strictly positive")
    return m / (m - 1.0) * u ** (m - 1.0)


def from_pressure(v, m: float) -> np.ndarray:
    """Inverse of :func:`to_pressure`: u = ((m-1) v / m)^(1/(m-1))."""
    if m <= 1:
        raise DomainError(f"exponent m must be > 1, got {m}")
    v = np.asarray(v, dtype=float)
    if np.any(~(v > 0)):
        raise DomainError("pressure must be strictly positive")
    return ((m - 1.0) * v / m) ** (1.0 / (m - 1.0))


def stable_dt(field: PressureField, m: float, safety: float = DEFAULT_SAFETY) -> float:
    if not 0.0 < safety <= 1.0:
        raise UsageError(f"safety factor must lie in (0, 1], got {safety}")
    model = field.model
    h2 = model.h**2 * model.metric_scale(field.t)
    return safety * h2 / ((m - 1.0) * float(np.max(field.values)) + DT_EPS)


def pressure_rhs(model: ManifoldModel, v: np.ndarray, t: float, m: float) -> np.ndarray:
    """(m-1) v Lap v + |grad v|^2 at time t (no forcing)."""
    return (m - 1.0) * v * geo.laplacian(model, v, t) + geo.gradient_sq(model, v, t)


def _advance(model, v, t, dt, m, forcing):
    rhs = pressure_rhs(model, v, t, m)
    if forcing is not None:
        rhs = rhs + forcing(model.coords, t)
    return v + dt * rhs


def _check_positive(v, t, degenerate):
    if not np.all(np.isfinite(v)):
        raise InstabilityError(f"non-finite pressure after step ending at t = {t}")
    vmin = float(np.min(v))
    if (vmin < 0.0) if degenerate else (vmin <= 0.0):
        raise PositivityLossError(
            f"pressure lost positivity (min {vmin:.3e}) at t = {t}; reduce the safety factor"
        )


def step(field: PressureField, dt: float, m: float, forcing: Forcing | None = None,
         safety: float = DEFAULT_SAFETY, allow_degenerate: bool = False) -> PressureField:
    """One forward-Euler step; ``dt`` must not exceed ``stable_dt(field, m, safety)``."""
    if not dt > 0:
        raise UsageError(f"time step must be positive, got {dt}")
    limit = stable_dt(field, m, safety)
    if dt > limit * (1.0 + 1e-12):
        raise UsageError(f"dt = {dt:.3e} exceeds the stable limit {limit:.3e}")
    model = field.model
    t_new = field.t + dt
    model.metric_scale(t_new)
    v = _advance(model, np.asarray(field.values), field.t, dt, m, forcing)
    _check_positive(v, t_new, allow_degenerate)
    return PressureField(v, t_new, model)


def solve(model: ManifoldModel, v0, pme: PmeParameters, t_span: Sequence[float],
          snapshot_times: Sequence[float], forcing: Forcing | None = None,
          safety: float = DEFAULT_SAFETY, allow_degenerate: bool = False,
          K: float | None = None) -> RunTrace:
    """Integrate from ``t_span[0]`` to ``t_span[1]`` recording snapshots.

    The step is recomputed from :func:`stable_dt` every iteration and
    shortened to land exactly on each snapshot time.  The returned trace
    carries ``env.M = max v0``, ``env.T = t_span[1]`` and ``env.K`` equal to
    the model's Ricci bound over the run (or ``K`` if given, which must not
    be smaller).

    Parameters
    ----------
    allow_degenerate : bool
        Accept ``v >= 0`` instead of ``v > 0`` (compactly supported data).
    """
    t0, t1 = (float(x) for x in t_span)
    if not t1 > t0:
        raise UsageError(f"empty time span {t_span}")
    if pme.n != model.n:
        raise UsageError(f"pme dimension n={pme.n} does not match the {model.kind.value} (n={model.n})")
    if t1 >= model.extinction_time:
        raise ExtinctionError(f"time span reaches the extinction time {model.extinction_time}")
    if not 0.0 < safety <= 1.0:
        raise UsageError(f"safety factor must lie in (0, 1], got {safety}")
    targets = np.asarray(sorted(float(s) for s in snapshot_times))
    if targets.size == 0:
        raise UsageError("at least one snapshot time is required")
    if np.any(np.diff(targets) <= 0):
        raise UsageError("snapshot times must be distinct")
    if targets[0] < t0 or targets[-1] > t1:
        raise UsageError(f"snapshot times must lie in [{t0}, {t1}]")
    v = np.array(v0, dtype=float)
    if v.shape != (model.N,):
        raise UsageError(f"initial data has shape {v.shape}, expected ({model.N},)")
    if not np.all(np.isfinite(v)):
        raise DomainError("initial data must be finite")
    vmin = float(np.min(v))
    if (vmin < 0.0) if allow_degenerate else (vmin <= 0.0):
        need = "non-negative" if allow_degenerate else "strictly positive"
        raise DomainError(f"initial pressure must be {need}, min is {vmin:.3e}")

    k_model = geo.run_ricci_bound(model, t1)
    if K is None:
        K = k_model
    elif K < k_model:
        raise UsageError(f"Ricci bound K={K} is below the model's bound {k_model}")
    env = FlowEnv(K=float(K), M=float(np.max(v)), T=t1)

    m = pme.m
    dts, vmax, vmin = [], [float(v.max())], [float(v.min())]
    snaps: list[PressureField] = []
    t = t0
    h2 = model.h**2
    for target in targets:
        while t < target:
            top = float(v.max())
            dt = safety * h2 * model.metric_scale(t) / ((m - 1.0) * top + DT_EPS)
            land = t + dt * (1.0 + 1e-9) >= target
            if land:
                dt = target - t
            v = _advance(model, v, t, dt, m, forcing)
            t = target if land else t + dt
            _check_positive(v, t, allow_degenerate)
            dts.append(dt)
            vmax.append(float(v.max()))
            vmin.append(float(v.min()))
        snaps.append(PressureField(v.copy(), target, model))

    return RunTrace(model, pme, env, snaps, np.array(dts), np.array(vmax), np.array(vmin),
                    degenerate=allow_degenerate,
                    meta={"t_span": [t0, t1], "safety": safety, "steps": len(dts)})


# -- initial data ----------------------------------------------------------

def initial_profile(model: ManifoldModel, name: str, seed: int | None = None,
                    **params) -> np.ndarray:
    """Named initial pressure profiles.

    ``constant``   c
    ``sine``       c + a sin(k x)                        (flat models)
    ``gaussian``   base + amplitude exp(-(d/width)^2), d = distance to ``center``
    ``barenblatt`` closed-form pressure at time t0 centred mid-domain (flat, n=1)
    ``random``     c + sum of ``modes`` seeded Fourier modes, scaled to ``amplitude``
    """
    x = model.coords
    p = {k: float(v) for k, v in params.items()}
    if name == "constant":
        return np.full(model.N, p.get("c", 1.0))
    if name == "sine":
        if not model.is_flat:
            raise UsageError("the sine profile is only defined on flat models")
        k = p.get("k", 1.0)
        if k != int(k):
            raise UsageError("sine wavenumber must be an integer to stay periodic")
        return p.get("c", 1.5) + p.get("a", 0.5) * np.sin(2.0 * math.pi * k * x / model.L)
    if name == "gaussian":
        center = p.get("center", 0.0)
        d = np.abs(x - center)
        if model.is_flat:
            d = np.minimum(d % model.L, model.L - d % model.L)
        return p.get("base", 1.0) + p.get("amplitude", 1.0) * np.exp(-(d / p.get("width", 0.5)) ** 2)
    if name == "barenblatt":
        from .oracle import barenblatt_pressure

        if not model.is_flat or model.n != 1:
            raise UsageError("barenblatt initial data needs the flat circle")
        return barenblatt_pressure(x - 0.5 * model.L, p.get("t0", 1.0), p.get("m", 2.0), 1,
                                   p.get("mass", 1.0))
    if name == "random":
        rng = np.random.default_rng(seed)
        modes = int(p.get("modes", 4))
        c, amp = p.get("c", 2.0), p.get("amplitude", 0.5)
        if not 0 < amp < c:
            raise UsageError("random profile needs 0 < amplitude < c to stay positive")
        if model.is_flat:
            basis = [np.sin(2.0 * math.pi * (j + 1) * x / model.L + rng.uniform(0, 2 * math.pi))
                     for j in range(modes)]
        else:
            basis = [np.cos((j + 1) * x) for j in range(modes)]
        coef = rng.normal(size=modes) / np.arange(1, modes + 1)
        bump = sum(c_j * b for c_j, b in zip(coef, basis))
        bump = bump / max(float(np.max(np.abs(bump))), 1e-300)
        return c + amp * bump
    raise UsageError(f"unknown initial profile {name!r}")


def load_profile_csv(path: str | Path, column: str, model: ManifoldModel) -> np.ndarray:
    """Read one named column of initial data (one row per grid point)."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise UsageError(f"{path}: {exc}") from exc
    if not rows or column not in rows[0]:
        raise UsageError(f"{path}: column {column!r} not found")
    try:
        vals = np.array([float(r[column]) for r in rows])
    except ValueError as exc:
        raise UsageError(f"{path}: non-numeric entry in column {column!r}") from exc
    if vals.shape != (model.N,):
        raise UsageError(f"{path}: {vals.size} rows, model grid has {model.N} points")
    return vals
