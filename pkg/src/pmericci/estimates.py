"""Estimate quantities along a run, their right-hand sides, and cutoffs.

Pointwise, with ``P = |grad v|^2 / v`` and the time derivative taken from
the equation itself (``v_t = (m-1) v Lap v + |grad v|^2``),

    F = (1 - alpha) P - alpha (m-1) Lap v - alpha phi,     G = gamma F.

The bare quantity ``P - alpha v_t / v`` equals ``F + alpha phi``.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import geometry as geo
from .errors import AdmissibilityError, DomainError, GeometryError, UsageError
from .families import FunctionTriple, PmeParameters, FlowEnv, eval_triple, full_check
from .solver import RunTrace

CSV_HEADER = ("t,sup_F,sup_bare,G,rhs_total,rhs_local,rhs_cutoff,"
              "rhs_curv1,rhs_curv2,margin,C_star")
DEFAULT_C_CHI = 32.0
MASK_WIDTH = 3


class RhsMode(str, enum.Enum):
    THM21A = "thm21a"      # cutoff term C a M m^2 / (R^2 gamma)
    THM21B = "thm21b"      # cutoff term C a M m^2 alpha^4 / (R^2 gamma)
    COROLLARY = "corollary"


def default_mode(triple: FunctionTriple) -> RhsMode:
    """The local estimate that matches the triple's ratio hypothesis."""
    return RhsMode.THM21A if triple.default_ratio_mode.value == "alpha4" else RhsMode.THM21B


@dataclass(frozen=True)
class RhsBreakdown:
    """Right-hand side of the local (or global) estimate at one time."""

    t: float
    a: float
    C: float
    R: float | None
    mode: RhsMode
    local: float
    cutoff: float
    curv1: float
    curv2: float

    @property
    def total(self) -> float:
        return self.local + self.cutoff + self.curv1 + self.curv2

    @property
    def c_coefficient(self) -> float:
        """d(total)/dC; the terms carrying the universal constant."""
        return (self.local + self.cutoff) / self.C if self.C > 0 else math.nan

    def to_dict(self) -> dict:
        return {"t": self.t, "a": self.a, "C": self.C, "R": self.R, "mode": self.mode.value,
                "local": self.local, "cutoff": self.cutoff, "curv1": self.curv1,
                "curv2": self.curv2, "total": self.total}


def _curvature_terms(pme: PmeParameters, K: float, alpha: float) -> tuple[float, float]:
    a, m = pme.a, pme.m
    return (alpha**2 * K * math.sqrt(a * (m - 1.0)),
            K * alpha**2 * math.sqrt(a * pme.n) / (m - 1.0))


def theorem_rhs(pme: PmeParameters, env: FlowEnv, triple: FunctionTriple, R: float,
                C: float, t: float, mode: RhsMode | str = RhsMode.THM21A) -> RhsBreakdown:
    """Local bound on the ball of radius 2R at time t."""
    mode = RhsMode(mode)
    if mode is RhsMode.COROLLARY:
        return corollary_rhs(pme, env, triple, C, t)
    if not t > 0:
        raise DomainError(f"right-hand side needs t > 0, got {t}")
    if not R > 0 or not C > 0:
        raise UsageError(f"R and C must be positive, got R={R}, C={C}")
    s = eval_triple(triple, t)
    if not s.gamma > 0:
        raise DomainError(f"gamma({t}) = {s.gamma}: cutoff term is singular, use t > 0")
    a, K, M, m, al = pme.a, env.K, env.M, pme.m, s.alpha
    local = C * a * al**2 * ((1.0 + math.sqrt(K) * R) / R**2 + K)
    cutoff = C * a * M * m**2 / (R**2 * s.gamma)
    if mode is RhsMode.THM21B:
        cutoff *= al**4
    c1, c2 = _curvature_terms(pme, K, al)
    return RhsBreakdown(float(t), a, float(C), float(R), mode, local, cutoff, c1, c2)


def corollary_rhs(pme: PmeParameters, env: FlowEnv, triple: FunctionTriple, C: float,
                  t: float) -> RhsBreakdown:
    """Global bound (no ball): the R -> infinity limit of the local one."""
    if not t > 0:
        raise DomainError(f"right-hand side needs t > 0, got {t}")
    if not C > 0:
        raise UsageError(f"C must be positive, got {C}")
    al = eval_triple(triple, t).alpha
    c1, c2 = _curvature_terms(pme, env.K, al)
    return RhsBreakdown(float(t), pme.a, float(C), None, RhsMode.COROLLARY,
                        C * pme.a * al**2 * env.K, 0.0, c1, c2)


# -- F along a trace ---------------------------------------------------------

@dataclass
class EstimateSeries:
    """Per-snapshot suprema of F, the bare quantity and G, plus verdicts.

    ``rhs``, ``margin`` and ``C_star`` are filled in by :func:`verify_estimate`.
    """

    t: np.ndarray
    sup_F: np.ndarray
    sup_bare: np.ndarray
    gamma: np.ndarray
    G: np.ndarray
    R: float | None = None
    rhs: list[RhsBreakdown] = field(default_factory=list)
    margin: np.ndarray | None = None
    C_star_t: np.ndarray | None = None
    C_star: float | None = None
    C: float | None = None
    mode: RhsMode | None = None
    bare_violations: list[float] = field(default_factory=list)
    bare_C_star: float | None = None

    @property
    def passed(self) -> bool | None:
        if self.margin is None:
            return None
        return bool(np.all(self.margin >= 0))

    @property
    def min_margin(self) -> float | None:
        return None if self.margin is None else float(np.min(self.margin))

    def rows(self) -> list[list[float]]:
        out = []
        for i, t in enumerate(self.t):
            r = self.rhs[i] if self.rhs else None
            vals = [t, self.sup_F[i], self.sup_bare[i], self.G[i]]
            if r is None:
                vals += [math.nan] * 5
            else:
                vals += [r.total, r.local, r.cutoff, r.curv1, r.curv2]
            vals.append(math.nan if self.margin is None else self.margin[i])
            vals.append(math.nan if self.C_star_t is None else self.C_star_t[i])
            out.append([float(v) for v in vals])
        return out

    def write_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER.split(","))
            for row in self.rows():
                w.writerow([repr(v) for v in row])

    def to_dict(self) -> dict:
        return {
            "R": self.R, "C": self.C, "mode": None if self.mode is None else self.mode.value,
            "passed": self.passed, "min_margin": self.min_margin,
            "C_star": _finite_or_str(self.C_star),
            "bare_C_star": _finite_or_str(self.bare_C_star),
            "bare_violations": list(self.bare_violations),
            "columns": CSV_HEADER.split(","), "rows": self.rows(),
        }


def _finite_or_str(x):
    if x is None or math.isfinite(x):
        return x
    return "inf"


def ball_mask(model: geo.ManifoldModel, center: float, radius: float, t: float) -> np.ndarray:
    """Grid points within geodesic distance ``radius`` of ``center``."""
    return geo.distance(model, model.coords, center, t) <= radius * (1.0 + 1e-12)


def _snapshot_mask(model, t, R, center, width):
    mask = model.interior_mask(width)
    if R is not None:
        mask = mask & ball_mask(model, center, 2.0 * R, t)
    return mask


def pointwise_F(model: geo.ManifoldModel, v: np.ndarray, t: float, m: float,
                alpha: float, phi: float) -> dict[str, np.ndarray]:
    """F, P = |grad v|^2/v and Lap v at one time.  Requires v > 0."""
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0):
        raise DomainError(f"F needs a positive pressure; min v = {v.min()} at t = {t}")
    lap = geo.laplacian(model, v, t)
    P = geo.gradient_sq(model, v, t) / v
    F = (1.0 - alpha) * P - alpha * (m - 1.0) * lap - alpha * phi
    return {"F": F, "P": P, "lap": lap}


def compute_F(trace: RunTrace, triple: FunctionTriple, R: float | None = None,
              center: float = 0.0, mask_width: int = MASK_WIDTH) -> EstimateSeries:
    """Suprema of F and of the bare quantity at every snapshot.

    The supremum runs over the interior mask and, for a local estimate,
    over the ball of radius 2R about ``center``.
    """
    times = trace.times
    if np.any(times <= 0):
        raise DomainError("F is evaluated at t > 0 only; drop the t = 0 snapshot")
    s = eval_triple(triple, times)
    m = trace.pme.m
    supF, supB = [], []
    for i, snap in enumerate(trace.snapshots):
        mask = _snapshot_mask(trace.model, snap.t, R, center, mask_width)
        if not np.any(mask):
            raise GeometryError(f"empty evaluation region at t = {snap.t}")
        q = pointwise_F(trace.model, snap.values, snap.t, m, s.alpha[i], s.phi[i])
        F = q["F"][mask]
        bare = q["P"][mask] - s.alpha[i] * ((m - 1.0) * q["lap"][mask] + q["P"][mask])
        supF.append(float(F.max()))
        supB.append(float(bare.max()))
    supF = np.array(supF)
    return EstimateSeries(times, supF, np.array(supB), np.asarray(s.gamma, dtype=float),
                          s.gamma * supF, R=R)


def _c_star(lhs: float, rhs: RhsBreakdown) -> float:
    """Smallest C >= 0 with lhs <= rhs(C)."""
    rest = rhs.curv1 + rhs.curv2
    need = lhs - rest
    if need <= 0:
        return 0.0
    coef = rhs.c_coefficient
    return need / coef if coef > 0 else math.inf


def verify_estimate(trace: RunTrace, triple: FunctionTriple, R: float | None = None,
                    C: float | None = None, mode: RhsMode | str | None = None,
                    center: float = 0.0, t_grid=None) -> EstimateSeries:
    """Compare sup F with the estimate's right-hand side at every snapshot.

    ``R=None`` selects the global (corollary) bound.  With ``C`` given the
    verdict is ``margin >= 0`` everywhere; without it the calibrated
    ``C_star`` is returned and the right-hand side is reported at that value.

    Raises
    ------
    AdmissibilityError
        If the triple fails its admissibility or gamma conditions.
    """
    report = full_check(triple, t_grid)
    if not report.passed:
        bad = sorted(report.violations())
        if report.ratio is not None and not math.isfinite(report.ratio_sup):
            bad.append("ratio_unbounded")
        raise AdmissibilityError(f"triple {triple.describe()} is not admissible: {bad}", bad)
    env = triple.env
    if env.K < trace.env.K * (1.0 - 1e-12) or env.M < trace.env.M * (1.0 - 1e-12):
        raise UsageError(f"triple environment (K={env.K}, M={env.M}) does not cover the run "
                         f"(K={trace.env.K}, M={trace.env.M})")
    mode = RhsMode(mode) if mode is not None else (
        RhsMode.COROLLARY if R is None else default_mode(triple))
    if R is None:
        mode = RhsMode.COROLLARY
    elif mode is RhsMode.COROLLARY:
        raise UsageError("the corollary bound takes no radius")

    series = compute_F(trace, triple, R=R, center=center)
    pme = trace.pme

    def rhs_at(c, t):
        if mode is RhsMode.COROLLARY:
            return corollary_rhs(pme, env, triple, c, t)
        return theorem_rhs(pme, env, triple, R, c, t, mode)

    unit = [rhs_at(1.0, t) for t in series.t]
    cstar = np.array([_c_star(f, r) for f, r in zip(series.sup_F, unit)])
    bare = np.array([_c_star(b, r) for b, r in zip(series.sup_bare, unit)])
    series.C_star_t = cstar
    series.C_star = float(cstar.max())
    series.bare_C_star = float(bare.max())
    series.mode = mode
    if C is None:
        c_used = series.C_star if 0 < series.C_star < math.inf else 1.0
    else:
        c_used = float(C)
    series.C = c_used
    series.rhs = [rhs_at(c_used, t) for t in series.t]
    series.margin = np.array([r.total for r in series.rhs]) - series.sup_F
    bare_margin = np.array([r.total for r in series.rhs]) - series.sup_bare
    series.bare_violations = [float(t) for t, mg in zip(series.t, bare_margin) if mg < 0]
    return series


# -- Lemma residual ---------------------------------------------------------

@dataclass
class LemmaResidual:
    """RHS - LG on the interior grid at the inner snapshot times."""

    t: np.ndarray
    margin: np.ndarray        # (len(t), N); NaN outside the interior mask
    form: str
    dt: float
    h: float

    @property
    def min_margin(self) -> float:
        return float(np.nanmin(self.margin))

    @property
    def epsilon(self) -> float:
        """Size of the worst violation, zero if none."""
        return max(0.0, -self.min_margin)

    def per_time_min(self) -> np.ndarray:
        return np.nanmin(self.margin, axis=1)

    def to_dict(self) -> dict:
        return {"form": self.form, "dt": self.dt, "h": self.h, "min_margin": self.min_margin,
                "epsilon": self.epsilon, "t": [float(x) for x in self.t],
                "per_time_min": [float(x) for x in self.per_time_min()]}


LEMMA_FORMS = ("stated", "sign_free")


def lemma33_residual(trace: RunTrace, triple: FunctionTriple, K: float | None = None,
                     form: str = "stated", mask_width: int = MASK_WIDTH) -> LemmaResidual:
    """Discrete check of the differential inequality satisfied by G.

    ``LG = dG/dt - (m-1) v Lap G`` with dG/dt from centred differences of
    consecutive snapshots (which must be uniformly spaced).

    ``form="stated"`` uses the inequality with the closed quadratic term
    ``-G^2 / (a alpha^2 gamma)``.  ``form="sign_free"`` keeps the trace
    bound and ``-gamma ((m-1) Lap v)^2`` separately, which avoids squaring
    an inequality whose sides may be negative.
    """
    if form not in LEMMA_FORMS:
        raise UsageError(f"form must be one of {LEMMA_FORMS}, got {form!r}")
    times = trace.times
    if times.size < 3:
        raise UsageError("the lemma residual needs at least 3 snapshots")
    steps = np.diff(times)
    dt = float(steps.mean())
    if np.max(np.abs(steps - dt)) > 1e-9 * max(dt, 1e-300):
        raise UsageError("snapshots must be uniformly spaced in time")
    if np.any(times <= 0):
        raise DomainError("the lemma residual needs t > 0 snapshots")
    model, pme = trace.model, trace.pme
    m, nm1 = pme.m, pme.nm1
    K = trace.env.K if K is None else float(K)
    s = eval_triple(triple, times)

    fields = []
    for i, snap in enumerate(trace.snapshots):
        q = pointwise_F(model, snap.values, snap.t, m, s.alpha[i], s.phi[i])
        q["G"] = s.gamma[i] * q["F"]
        fields.append(q)

    inner = range(1, times.size - 1)
    out = np.full((times.size - 2, model.N), np.nan)
    mask = model.interior_mask(mask_width)
    for row, i in enumerate(inner):
        t = times[i]
        v = trace.snapshots[i].values
        q = fields[i]
        G, P, lap = q["G"], q["P"], q["lap"]
        al, alp, ph, ga, gap = s.alpha[i], s.alpha_prime[i], s.phi[i], s.gamma[i], s.gamma_prime[i]
        dG = (fields[i + 1]["G"] - fields[i - 1]["G"]) / (2.0 * dt)
        LG = dG - (m - 1.0) * v * geo.laplacian(model, G, t)
        lin = (gap / ga - (2.0 * ph / nm1 - alp) / al) * G
        common = (lin + (m - 1.0) * al**2 * ga * K**2 + 2.0 * ga * (al - 1.0) * K * P
                  + 2.0 * m * geo.gradient_dot(model, v, G, t))
        if form == "stated":
            rhs = (common - G**2 / (pme.a * al**2 * ga)
                   - 2.0 * (al - 1.0) / (pme.n * al**2) * P * G
                   - ga * (m - 1.0) * (al - 1.0) ** 2 / (pme.n * al**2) * P**2)
        else:
            rhs = (common - (G + ga * (al - 1.0) * P) ** 2 / (nm1 * al**2 * ga)
                   - ga * ((m - 1.0) * lap) ** 2)
        out[row, mask] = (rhs - LG)[mask]
    return LemmaResidual(times[1:-1], out, form, dt, model.h)


# -- cutoff functions --------------------------------------------------------

def cutoff_profile(r):
    """psi(r): 1 on [0,1], (1-(r-1)^2)^2 on [1,2], 0 beyond."""
    r = np.asarray(r, dtype=float)
    u = np.clip(r - 1.0, 0.0, 1.0)
    out = (1.0 - u * u) ** 2
    return float(out) if out.ndim == 0 else out


def cutoff_profile_sqrt_derivative(r):
    """d/dr sqrt(psi); |psi'|^2/psi = 4 (this)^2 = 16 (r-1)^2 on [1,2]."""
    r = np.asarray(r, dtype=float)
    inside = (r > 1.0) & (r < 2.0)
    out = np.where(inside, -2.0 * (r - 1.0), 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CutoffProfile:
    R: float
    center: float
    t: float
    values: np.ndarray
    grad_ratio: np.ndarray    # |grad chi|^2 / chi, zero where chi = 0
    neg_lap: np.ndarray       # -Lap chi


def build_cutoff(model: geo.ManifoldModel, x0: float, R: float, t: float = 0.0) -> CutoffProfile:
    """chi(x) = psi(d(x, x0, t) / R) on the model grid.

    ``|grad chi|^2 / chi`` is formed as ``4 |grad sqrt(chi)|^2``, which is
    smooth across the support boundary where the quotient is 0/0.
    """
    if not R > 0:
        raise UsageError(f"cutoff radius must be positive, got {R}")
    inj = geo.injectivity_scale(model, t)
    if 2.0 * R > inj * (1.0 + 1e-12):
        raise GeometryError(f"2R = {2 * R} exceeds the injectivity scale {inj} at t = {t}")
    rho = geo.distance(model, model.coords, x0, t)
    chi = cutoff_profile(rho / R)
    root = np.sqrt(chi)
    ratio = np.where(chi > 0, 4.0 * geo.gradient_sq(model, root, t), 0.0)
    neg_lap = -geo.laplacian(model, chi, t)
    for arr in (chi, ratio, neg_lap):
        arr.flags.writeable = False
    return CutoffProfile(float(R), float(x0), float(t), chi, ratio, neg_lap)


@dataclass(frozen=True)
class CutoffCheck:
    c1: float
    c2: float
    C_chi: float

    @property
    def passed(self) -> bool:
        return self.c1 <= self.C_chi and self.c2 <= self.C_chi

    def to_dict(self) -> dict:
        return {"c1": self.c1, "c2": self.c2, "C_chi": self.C_chi, "passed": self.passed}


def verify_cutoff(profile: CutoffProfile, model: geo.ManifoldModel, t: float | None = None,
                  K: float | None = None, C_chi: float = DEFAULT_C_CHI) -> CutoffCheck:
    """Empirical constants c1 = R^2 sup|grad chi|^2/chi, c2 = R^2 sup(-Lap chi)/(1 + sqrt(K) R)."""
    t = profile.t if t is None else float(t)
    if not math.isclose(t, profile.t, rel_tol=0, abs_tol=1e-14) or profile.values.shape != (model.N,):
        raise UsageError("cutoff profile was built for a different time or grid")
    if K is None:
        K = geo.ricci_bound(model, t)
    R = profile.R
    c1 = R**2 * float(profile.grad_ratio.max())
    c2 = R**2 * float(profile.neg_lap.max()) / (1.0 + math.sqrt(K) * R)
    return CutoffCheck(c1, c2, float(C_chi))


# -- classical Euclidean check ---------------------------------------------

@dataclass
class ClassicalCheck:
    t: np.ndarray
    s: np.ndarray             # sup over the mask of -(m-1) Lap v * t
    spread: np.ndarray        # max/min - 1 of -Lap v over the mask (inf unless -Lap v > 0)
    a_E: float

    @property
    def ratios(self) -> np.ndarray:
        return self.s / self.a_E

    @property
    def max_ratio(self) -> float:
        return float(np.max(self.ratios))

    def to_dict(self) -> dict:
        return {"a_E": self.a_E, "max_ratio": self.max_ratio,
                "t": [float(x) for x in self.t], "s": [float(x) for x in self.s],
                "spread": [float(x) for x in self.spread]}


MaskLike = np.ndarray | Callable[[float], np.ndarray] | None


def classical_ab_check(trace: RunTrace, mask: MaskLike = None,
                       lower: bool = False) -> ClassicalCheck:
    """sup_x of -(m-1) Lap v * t per snapshot, compared with a_E.

    ``mask`` restricts the supremum (a boolean array, or a callable of t
    returning one).  With ``lower=True`` the infimum is reported instead,
    which is what saturation tests need.
    """
    if not trace.model.is_flat:
        raise GeometryError("the classical check needs a flat model")
    m = trace.pme.m
    s, spread = [], []
    for snap in trace.snapshots:
        mk = mask(snap.t) if callable(mask) else mask
        mk = np.ones(trace.model.N, dtype=bool) if mk is None else np.asarray(mk, dtype=bool)
        q = -(m - 1.0) * geo.laplacian(trace.model, snap.values, snap.t)[mk] * snap.t
        s.append(float(q.min() if lower else q.max()))
        spread.append(float(q.max() / q.min() - 1.0) if q.min() > 0 else math.inf)
    return ClassicalCheck(trace.times, np.array(s), np.array(spread), trace.pme.a_euclid)
