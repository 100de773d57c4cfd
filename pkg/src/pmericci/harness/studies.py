"""Refinement studies that combine the solver with an oracle."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import UsageError
from ..families import PmeParameters
from ..geometry import ManifoldModel
from ..oracle import ConvergenceTable, ManufacturedSolution, convergence_order, mms_forcing
from ..solver import solve


def default_target(kind: str) -> ManufacturedSolution:
    return ManufacturedSolution.polar_cosine() if kind == "sphere" else ManufacturedSolution.sine()


def make_model(kind: str, N: int, L: float = 2.0 * np.pi, r0: float = 2.0) -> ManifoldModel:
    if kind == "sphere":
        return ManifoldModel.sphere(N, r0=r0)
    if kind == "torus":
        return ManifoldModel.torus(N, L=L)
    return ManifoldModel.circle(N, L=L)


def mms_error(model: ManifoldModel, target: ManufacturedSolution, m: float, T: float,
              safety: float = 0.2) -> float:
    """Max-norm error at time T of the forced run started from the target."""
    pme = PmeParameters(m, model.n)
    x = model.coords
    trace = solve(model, target.value(x, 0.0), pme, (0.0, T), [T],
                  forcing=mms_forcing(target, model, pme), safety=safety)
    return float(np.max(np.abs(trace.snapshots[-1].values - target.value(x, T))))


def mms_study(kind: str = "circle", resolutions: Sequence[int] = (64, 128, 256), m: float = 2.0,
              T: float = 0.5, target: ManufacturedSolution | None = None,
              L: float = 2.0 * np.pi, r0: float = 2.0) -> ConvergenceTable:
    """Spatial convergence table of a manufactured-solution run."""
    if kind != "sphere" and target is None and not np.isclose(L, 2.0 * np.pi):
        raise UsageError("the default flat target is 2*pi-periodic; use L = 2*pi")
    target = default_target(kind) if target is None else target
    errors = [mms_error(make_model(kind, N, L, r0), target, m, T) for N in resolutions]
    return convergence_order(errors, resolutions)
