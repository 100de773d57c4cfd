"""Coefficient triples (alpha, phi, gamma) and their admissibility checks.

A triple enters the estimated quantity

    F = |grad v|^2 / v - alpha * v_t / v - alpha * phi,      G = gamma * F,

and must satisfy a small system of ordinary-differential inequalities in
time.  Four closed-form families are provided (Li-Yau, Hamilton, Li-Xu and
linear Li-Xu type) together with a tabulated family read from CSV.

All margins are reported with the convention "non-negative means the
condition holds".
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, UsageError

DEFAULT_SLACK = 1e-12
# Below this argument the Li-Xu closed forms are summed as power series.
_SERIES_CUTOFF = 1.0
_SERIES_TERMS = 24


class Family(str, enum.Enum):
    LI_YAU = "liyau"
    HAMILTON = "hamilton"
    LI_XU = "lixu"
    LINEAR_LI_XU = "linear_lixu"
    SAMPLED = "sampled"


class RatioMode(str, enum.Enum):
    """Which bounded ratio accompanies the gamma inequality."""

    ALPHA4 = "alpha4"  # gamma * alpha**4 / (alpha - 1)
    PLAIN = "plain"  # gamma / (alpha - 1)


@dataclass(frozen=True)
class PmeParameters:
    """Exponent ``m > 1`` of ``u_t = Lap u^m`` and the manifold dimension ``n``."""

    m: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.m) and self.m > 1.0):
            raise DomainError(f"exponent m must be > 1, got {self.m!r}")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"dimension n must be an integer >= 1, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def nm1(self) -> float:
        """n (m - 1)."""
        return self.n * (self.m - 1.0)

    @property
    def a(self) -> float:
        """Constant of the Ricci-flow estimate, n(m-1) / (n(m-1) + 1)."""
        return self.nm1 / (self.nm1 + 1.0)

    @property
    def a_euclid(self) -> float:
        """Classical Aronson-Benilan constant, n(m-1) / (n(m-1) + 2)."""
        return self.nm1 / (self.nm1 + 2.0)


@dataclass(frozen=True)
class FlowEnv:
    """Ricci bound ``K``, pressure bound ``M`` and time horizon ``T``."""

    K: float
    M: float
    T: float

    def __post_init__(self):
        if not (math.isfinite(self.K) and self.K >= 0.0):
            raise DomainError(f"Ricci bound K must be >= 0, got {self.K!r}")
        if not (math.isfinite(self.M) and self.M > 0.0):
            raise DomainError(f"pressure bound M must be > 0, got {self.M!r}")
        if not (math.isfinite(self.T) and self.T > 0.0):
            raise DomainError(f"time horizon T must be > 0, got {self.T!r}")

    def rate(self, pme: PmeParameters) -> float:
        """The product (m - 1) M K, with units of 1/time."""
        return (pme.m - 1.0) * self.M * self.K


@dataclass(frozen=True)
class TripleSample:
    """Values and first derivatives of a triple at time(s) ``t``.

    Fields are floats for scalar ``t`` and arrays for array ``t``.
    """

    t: Any
    alpha: Any
    alpha_prime: Any
    phi: Any
    phi_prime: Any
    gamma: Any
    gamma_prime: Any


class SampledTable:
    """Tabulated triple with monotone cubic interpolation.

    Derivative tables come from second-order centred differences of the
    nodal data (one-sided second order at the two ends) and are
    interpolated the same way as the values.
    """

    def __init__(self, t, alpha, phi, gamma):
        t = np.asarray(t, dtype=float)
        cols = [np.asarray(c, dtype=float) for c in (alpha, phi, gamma)]
        if t.ndim != 1 or any(c.shape != t.shape for c in cols):
            raise UsageError("sampled triple columns must be 1-D and of equal length")
        if t.size < 3:
            raise UsageError("sampled triple needs at least 3 rows")
        if not np.all(np.diff(t) > 0):
            raise UsageError("sampled triple times must be strictly increasing")
        if t[0] <= 0:
            raise DomainError("sampled triple times must be > 0")
        if not all(np.all(np.isfinite(c)) for c in cols):
            raise UsageError("sampled triple contains non-finite values")
        self.t = t
        self.alpha, self.phi, self.gamma = cols
        self._interp = {}
        for name, col in zip(("alpha", "phi", "gamma"), cols):
            deriv = np.gradient(col, t, edge_order=2)
            self._interp[name] = PchipInterpolator(t, col, extrapolate=False)
            self._interp[name + "_prime"] = PchipInterpolator(t, deriv, extrapolate=False)

    def __call__(self, t: np.ndarray) -> dict[str, np.ndarray]:
        lo, hi = self.t[0], self.t[-1]
        if np.any(t < lo - 1e-12 * hi) or np.any(t > hi * (1 + 1e-12)):
            raise DomainError(f"time outside tabulated range [{lo}, {hi}]")
        tc = np.clip(t, lo, hi)
        return {k: f(tc) for k, f in self._interp.items()}

    @classmethod
    def from_csv(cls, path: str | Path) -> "SampledTable":
        """Read a table with header ``t,alpha,phi,gamma``."""
        path = Path(path)
        try:
            with path.open(newline="") as fh:
                reader = csv.reader(fh)
                header = [h.strip() for h in next(reader)]
                if header != ["t", "alpha", "phi", "gamma"]:
                    raise UsageError(f"{path}: header must be 't,alpha,phi,gamma', got {header}")
                rows = [[float(x) for x in row] for row in reader if row]
        except OSError as exc:
            raise UsageError(f"{path}: {exc}") from exc
        except (ValueError, StopIteration) as exc:
            raise UsageError(f"{path}: malformed triple table ({exc})") from exc
        data = np.array(rows, dtype=float).reshape(-1, 4)
        return cls(data[:, 0], data[:, 1], data[:, 2], data[:, 3])

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "alpha", "phi", "gamma"])
            for row in zip(self.t, self.alpha, self.phi, self.gamma):
                w.writerow([repr(float(x)) for x in row])


@dataclass(frozen=True)
class FunctionTriple:
    """A closed-form or tabulated (alpha, phi, gamma) family.

    Use the named constructors (:meth:`li_yau`, :meth:`hamilton`, ...)
    rather than filling ``params`` by hand.
    """

    family: Family
    pme: PmeParameters
    env: FlowEnv
    params: Mapping[str, float] = field(default_factory=dict)
    table: SampledTable | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        p = dict(self.params)
        if self.family is Family.LI_YAU:
            alpha, theta = p.get("alpha", 2.0), p.get("theta", 1.0)
            if not alpha > 1.0:
                raise DomainError(f"Li-Yau constant alpha must be > 1, got {alpha}")
            if not 0.0 < theta <= 2.0:
                raise DomainError(f"Li-Yau exponent theta must lie in (0, 2], got {theta}")
            p = {"alpha": float(alpha), "theta": float(theta)}
        elif self.family is Family.LINEAR_LI_XU:
            c = p.get("c", 1.0)
            if not c > 0.0:
                raise DomainError(f"linear Li-Xu slope coefficient must be > 0, got {c}")
            p = {"c": float(c)}
        elif self.family is Family.LI_XU:
            p = {"phi_scale": float(p.get("phi_scale", 2.0))}
        elif self.family is Family.SAMPLED:
            if self.table is None:
                raise UsageError("sampled family requires a table")
        if self.family in (Family.HAMILTON, Family.LI_XU, Family.LINEAR_LI_XU):
            if self.env.rate(self.pme) <= 0.0:
                raise DomainError(
                    f"{self.family.value} family needs (m-1) M K > 0; got K={self.env.K}"
                )
        object.__setattr__(self, "params", p)

    @classmethod
    def li_yau(cls, pme, env, alpha=2.0, theta=1.0):
        return cls(Family.LI_YAU, pme, env, {"alpha": alpha, "theta": theta})

    @classmethod
    def hamilton(cls, pme, env):
        return cls(Family.HAMILTON, pme, env)

    @classmethod
    def li_xu(cls, pme, env, phi_scale=2.0):
        return cls(Family.LI_XU, pme, env, {"phi_scale": phi_scale})

    @classmethod
    def linear_li_xu(cls, pme, env, c=1.0):
        return cls(Family.LINEAR_LI_XU, pme, env, {"c": c})

    @classmethod
    def sampled(cls, pme, env, table: SampledTable):
        return cls(Family.SAMPLED, pme, env, table=table)

    @property
    def default_ratio_mode(self) -> RatioMode:
        """Li-Xu pairs with the alpha**4 ratio, every other family with the plain one."""
        return RatioMode.ALPHA4 if self.family is Family.LI_XU else RatioMode.PLAIN

    def describe(self) -> dict:
        d = {"family": self.family.value, **self.params}
        if self.table is not None:
            d["rows"] = int(self.table.t.size)
        return d


# -- closed forms ----------------------------------------------------------

def _csch2(y):
    # 1/sinh(y)^2 without overflow for large y
    e = np.exp(-2.0 * y)
    return 4.0 * e / np.expm1(-2.0 * y) ** 2


def _series_shcosh_minus_y(y):
    """sinh(y) cosh(y) - y summed term by term (small y)."""
    out = np.zeros_like(y)
    z = 2.0 * y
    term = z.copy()
    for k in range(1, _SERIES_TERMS):
        term = term * z * z / ((2 * k) * (2 * k + 1))
        out += term / 2.0
    return out


def _series_ycosh_minus_sinh(y):
    """y cosh(y) - sinh(y) summed term by term (small y)."""
    out = np.zeros_like(y)
    fact_term = y.copy()  # y^(2k+1) / (2k+1)!
    for k in range(1, _SERIES_TERMS):
        fact_term = fact_term * y * y / ((2 * k) * (2 * k + 1))
        out += 2 * k * fact_term
    return out


def _li_xu(t, pme, env, phi_scale):
    x = env.rate(pme)
    y = x * t
    small = y < _SERIES_CUTOFF
    am1 = np.empty_like(y)
    dalpha = np.empty_like(y)
    ys, yl = y[small], y[~small]
    sh = np.sinh(ys)
    am1[small] = _series_shcosh_minus_y(ys) / sh**2
    dalpha[small] = 2.0 * x * _series_ycosh_minus_sinh(ys) / sh**3
    c2 = _csch2(yl)
    am1[~small] = 1.0 / np.tanh(yl) - yl * c2
    dalpha[~small] = 2.0 * x * (yl / np.tanh(yl) - 1.0) * c2
    coth = 1.0 / np.tanh(y)
    phi = phi_scale * pme.nm1 * x * (1.0 + coth)
    dphi = -phi_scale * pme.nm1 * x * x * _csch2(y)
    e = np.exp(-2.0 * y)
    gamma = np.tanh(y)
    dgamma = x * 4.0 * e / (1.0 + e) ** 2
    return 1.0 + am1, dalpha, phi, dphi, gamma, dgamma


def _closed_form(triple: FunctionTriple, t: np.ndarray):
    pme, env, p = triple.pme, triple.env, triple.params
    nm1 = pme.nm1
    x = env.rate(pme)
    fam = triple.family
    if fam is Family.LI_YAU:
        a, th = p["alpha"], p["theta"]
        alpha = np.full_like(t, a)
        dalpha = np.zeros_like(t)
        phi = a * nm1 / t + nm1 * x / (a - 1.0)
        dphi = -a * nm1 / t**2
        gamma = t**th
        dgamma = th * t ** (th - 1.0)
    elif fam is Family.HAMILTON:
        e2 = np.exp(2.0 * x * t)
        e4 = np.exp(4.0 * x * t)
        alpha, dalpha = e2, 2.0 * x * e2
        phi = nm1 * e4 / t
        dphi = nm1 * e4 * (4.0 * x * t - 1.0) / t**2
        gamma, dgamma = t * e2, e2 * (1.0 + 2.0 * x * t)
    elif fam is Family.LI_XU:
        alpha, dalpha, phi, dphi, gamma, dgamma = _li_xu(t, pme, env, p["phi_scale"])
    elif fam is Family.LINEAR_LI_XU:
        c = p["c"]
        alpha = 1.0 + c * x * t
        dalpha = np.full_like(t, c * x)
        phi = nm1 / t + c * nm1 * x
        dphi = -nm1 / t**2
        gamma = c * x * t
        dgamma = np.full_like(t, c * x)
    else:
        v = triple.table(t)
        return (v["alpha"], v["alpha_prime"], v["phi"], v["phi_prime"],
                v["gamma"], v["gamma_prime"])
    return alpha, dalpha, phi, dphi, gamma, dgamma


def eval_triple(triple: FunctionTriple, t) -> TripleSample:
    """Evaluate a triple and its analytic first derivatives at ``t > 0``.

    ``t`` may be a scalar or an array; the returned fields follow suit.
    """
    scalar = np.ndim(t) == 0
    ta = np.atleast_1d(np.asarray(t, dtype=float))
    if not np.all(ta > 0) or not np.all(np.isfinite(ta)):
        raise DomainError("triples are evaluated at t > 0 only")
    vals = _closed_form(triple, ta)
    if scalar:
        vals = [float(v[0]) for v in vals]
        ta = float(ta[0])
    return TripleSample(ta, *vals)


def default_time_grid(T: float, num: int = 200, lo_fraction: float = 1e-3) -> np.ndarray:
    """Log-uniform grid on [lo_fraction * T, T]."""
    return np.logspace(math.log10(lo_fraction * T), math.log10(T), num)


def sample_triple(triple: FunctionTriple, t_grid) -> SampledTable:
    """Tabulate a triple on ``t_grid`` (handy for building perturbed variants)."""
    s = eval_triple(triple, np.asarray(t_grid, dtype=float))
    return SampledTable(s.t, s.alpha, s.phi, s.gamma)


def derivative_errors(triple: FunctionTriple, t_grid, h: float = 1e-4) -> dict[str, float]:
    """Max |analytic - central difference| per component over ``t_grid``."""
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 3:
        raise UsageError("derivative check needs at least 3 grid points")
    if not np.all(np.diff(t) > 0) or t[0] <= 0:
        raise UsageError("derivative check grid must be strictly increasing and > 0")
    if t[0] - h <= 0:
        raise UsageError(f"step h={h} reaches t <= 0 at the first grid point")
    mid = eval_triple(triple, t)
    plus = eval_triple(triple, t + h)
    minus = eval_triple(triple, t - h)
    out = {}
    for name in ("alpha", "phi", "gamma"):
        fd = (getattr(plus, name) - getattr(minus, name)) / (2.0 * h)
        out[name] = float(np.max(np.abs(getattr(mid, name + "_prime") - fd)))
    return out


def derivative_consistency(triple: FunctionTriple, t_grid, h: float = 1e-4) -> float:
    """Largest derivative mismatch over alpha, phi and gamma."""
    return max(derivative_errors(triple, t_grid, h).values())


# -- condition checks ------------------------------------------------------

@dataclass
class ConditionReport:
    """Per-condition margins over a time grid.

    ``margins`` holds absolute values (non-negative means satisfied),
    ``relative`` the margin divided by the sum of magnitudes of its terms.
    A non-strict condition passes where ``relative >= -slack``; a strict one
    needs a positive margin.
    """

    t: np.ndarray
    margins: dict[str, np.ndarray] = field(default_factory=dict)
    relative: dict[str, np.ndarray] = field(default_factory=dict)
    strict: dict[str, bool] = field(default_factory=dict)
    slack: float = DEFAULT_SLACK
    ratio: np.ndarray | None = None
    ratio_mode: RatioMode | None = None
    notes: list[str] = field(default_factory=list)

    def add(self, name, absolute, relative, strict=False):
        self.margins[name] = np.asarray(absolute, dtype=float)
        self.relative[name] = np.asarray(relative, dtype=float)
        self.strict[name] = strict

    def ok(self, name: str) -> np.ndarray:
        if self.strict[name]:
            return self.margins[name] > 0
        return self.relative[name] >= -self.slack

    def violations(self) -> dict[str, list[float]]:
        out = {}
        for name in self.margins:
            bad = ~self.ok(name)
            if np.any(bad):
                out[name] = [float(x) for x in self.t[bad]]
        return out

    @property
    def ratio_sup(self) -> float | None:
        """Empirical bound C2 for the selected ratio (``inf`` if singular)."""
        if self.ratio is None:
            return None
        return float(np.max(self.ratio))

    @property
    def passed(self) -> bool:
        ratio_ok = self.ratio is None or math.isfinite(self.ratio_sup)
        return not self.violations() and ratio_ok

    def minima(self) -> dict[str, float]:
        return {k: float(np.min(v)) for k, v in self.margins.items()}

    def worst(self) -> dict[str, dict[str, float]]:
        out = {}
        for k, rel in self.relative.items():
            i = int(np.argmin(rel))
            out[k] = {"t": float(self.t[i]), "margin": float(self.margins[k][i]),
                      "relative": float(rel[i])}
        return out

    def merge(self, other: "ConditionReport") -> "ConditionReport":
        if self.t.shape != other.t.shape or not np.array_equal(self.t, other.t):
            raise UsageError("cannot merge condition reports on different grids")
        merged = ConditionReport(self.t, dict(self.margins), dict(self.relative),
                                 dict(self.strict), max(self.slack, other.slack),
                                 self.ratio, self.ratio_mode, self.notes + other.notes)
        merged.margins.update(other.margins)
        merged.relative.update(other.relative)
        merged.strict.update(other.strict)
        if other.ratio is not None:
            merged.ratio, merged.ratio_mode = other.ratio, other.ratio_mode
        return merged

    def to_dict(self) -> dict:
        sup = self.ratio_sup
        return {
            "passed": self.passed,
            "slack": self.slack,
            "t_min": float(self.t[0]),
            "t_max": float(self.t[-1]),
            "points": int(self.t.size),
            "minima": self.minima(),
            "worst": self.worst(),
            "violations": {k: {"count": len(v), "first_t": v[0]}
                           for k, v in self.violations().items()},
            "ratio_mode": None if self.ratio_mode is None else self.ratio_mode.value,
            "ratio_sup": None if sup is None else (sup if math.isfinite(sup) else "inf"),
            "notes": list(self.notes),
        }


def _terms_margin(terms: Iterable[np.ndarray], factor=1.0):
    terms = [np.asarray(x, dtype=float) for x in terms]
    total = sum(terms)
    scale = sum(np.abs(x) for x in terms)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        rel = np.where(scale > 0, total / np.where(scale > 0, scale, 1.0), 0.0)
        absolute = factor * total
    return absolute, rel


def _check_grid(t_grid, T):
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise UsageError("condition grid must be a non-empty 1-D sequence")
    if np.any(t <= 0) or np.any(t > T * (1 + 1e-12)):
        raise DomainError(f"condition grid must lie in (0, T] with T={T}")
    return t


def check_admissibility(triple: FunctionTriple, t_grid=None,
                        slack: float = DEFAULT_SLACK) -> ConditionReport:
    """Margins of the alpha/phi system plus positivity and monotonicity.

    Conditions (``nm1 = n(m-1)``, ``x = (m-1) M K``):

    ``sys1``  2 phi/nm1 - 2x - (2 phi/nm1 - alpha')/alpha >= 0
    ``sys2``  2 phi/nm1 - alpha' > 0
    ``sys3``  phi^2/nm1 + alpha phi' >= 0
    ``alpha_gt_1``, ``phi_pos``, ``gamma_pos`` (strict) and
    ``alpha_nondecr``, ``gamma_nondecr`` via the analytic derivatives and
    ``alpha_grid_monotone``, ``gamma_grid_monotone`` via consecutive values.
    """
    t = default_time_grid(triple.env.T) if t_grid is None else _check_grid(t_grid, triple.env.T)
    s = eval_triple(triple, t)
    nm1, x = triple.pme.nm1, triple.env.rate(triple.pme)
    rep = ConditionReport(t, slack=slack)
    two_phi = 2.0 * s.phi / nm1
    rep.add("sys1", *_terms_margin([two_phi * (s.alpha - 1.0) / s.alpha,
                                    np.full_like(t, -2.0 * x), s.alpha_prime / s.alpha]))
    rep.add("sys2", *_terms_margin([two_phi, -s.alpha_prime]), strict=True)
    pos = s.phi > 0
    safe_phi = np.where(pos, s.phi, 1.0)
    scaled = _terms_margin([safe_phi / nm1, s.alpha * s.phi_prime / safe_phi], safe_phi)
    with np.errstate(over="ignore"):
        plain = _terms_margin([np.where(pos, 0.0, s.phi) ** 2 / nm1, s.alpha * s.phi_prime])
    rep.add("sys3", np.where(pos, scaled[0], plain[0]), np.where(pos, scaled[1], plain[1]))
    rep.add("alpha_gt_1", s.alpha - 1.0, np.sign(s.alpha - 1.0), strict=True)
    rep.add("phi_pos", s.phi, np.sign(s.phi), strict=True)
    rep.add("gamma_pos", s.gamma, np.sign(s.gamma), strict=True)
    # relative form is the logarithmic derivative t f'/f, so interpolation noise
    # on a constant column stays far below the slack
    with np.errstate(divide="ignore", invalid="ignore"):
        for name, f, fp in (("alpha_nondecr", s.alpha, s.alpha_prime),
                            ("gamma_nondecr", s.gamma, s.gamma_prime)):
            rel = np.where(f > 0, t * fp / np.where(f > 0, f, 1.0), np.sign(fp))
            rep.add(name, fp, rel)
    for name, vals in (("alpha_grid_monotone", s.alpha), ("gamma_grid_monotone", s.gamma)):
        step = np.diff(vals, prepend=vals[0])
        scale = np.maximum(np.abs(vals), np.finfo(float).tiny)
        rep.add(name, step, step / scale)
    return rep


def ratio_values(sample: TripleSample, mode: RatioMode) -> np.ndarray:
    am1 = np.asarray(sample.alpha, dtype=float) - 1.0
    gamma = np.asarray(sample.gamma, dtype=float)
    num = gamma * np.asarray(sample.alpha, dtype=float) ** 4 if mode is RatioMode.ALPHA4 else gamma
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(am1 > 0, num / np.where(am1 > 0, am1, 1.0), np.inf)


def check_gamma_system(triple: FunctionTriple, t_grid=None, ratio_mode=None,
                       slack: float = DEFAULT_SLACK) -> ConditionReport:
    """Gamma inequality margin and the supremum of the selected ratio.

    ``gamma_sys`` is ``(2 phi/nm1 - alpha')/alpha - gamma'/gamma`` (must be
    >= 0).  The ratio is ``gamma alpha^4/(alpha-1)`` or ``gamma/(alpha-1)``;
    its grid supremum is the empirical C2 and is ``inf`` wherever alpha == 1.
    """
    mode = triple.default_ratio_mode if ratio_mode is None else RatioMode(ratio_mode)
    t = default_time_grid(triple.env.T) if t_grid is None else _check_grid(t_grid, triple.env.T)
    s = eval_triple(triple, t)
    nm1 = triple.pme.nm1
    rep = ConditionReport(t, slack=slack)
    with np.errstate(divide="ignore", invalid="ignore"):
        rep.add("gamma_sys", *_terms_margin([2.0 * s.phi / (nm1 * s.alpha),
                                             -s.alpha_prime / s.alpha,
                                             -s.gamma_prime / s.gamma]))
    rep.ratio = ratio_values(s, mode)
    rep.ratio_mode = mode
    singular = ~np.isfinite(rep.ratio)
    if np.any(singular):
        rep.notes.append(f"ratio singular (alpha == 1) at t = {float(t[singular][0])!r}")
    if triple.family is Family.HAMILTON:
        x = triple.env.rate(triple.pme)
        rep.notes.append(
            f"gamma/(alpha-1) -> 1/(2(m-1)MK) = {1.0 / (2.0 * x):.6g} as t -> 0+ "
            "(a bare 1/(2K) limit omits the (m-1)M factor)"
        )
    return rep


def full_check(triple: FunctionTriple, t_grid=None, ratio_mode=None,
               slack: float = DEFAULT_SLACK) -> ConditionReport:
    """Admissibility and gamma checks merged into one report."""
    return check_admissibility(triple, t_grid, slack).merge(
        check_gamma_system(triple, t_grid, ratio_mode, slack))
