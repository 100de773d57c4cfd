"""Run orchestration, report bundles, emission and parameter sweeps."""
from __future__ import annotations

import csv
import itertools
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np
import scipy

from .. import __version__
from ..errors import AdmissibilityError, PmeError, UsageError
from ..estimates import (CSV_HEADER, EstimateSeries, RhsMode, build_cutoff, lemma33_residual,
                         verify_cutoff, verify_estimate)
from ..families import (ConditionReport, FlowEnv, FunctionTriple, PmeParameters, SampledTable,
                        full_check)
from ..geometry import ManifoldModel, run_ricci_bound
from ..solver import RunTrace, initial_profile, load_profile_csv, solve
from .config import RunConfig
from .studies import mms_study

OUT_ENV = "PMERICCI_OUT"
_PROFILE_KEYS = ("c", "a", "k", "base", "amplitude", "width", "center", "t0", "mass", "modes")


def _staged(stage: str, fn, *args, **kwargs):
    """Call ``fn`` and tag any package error with the pipeline stage."""
    try:
        return fn(*args, **kwargs)
    except PmeError as exc:
        if not hasattr(exc, "stage"):
            exc.stage = stage
        raise


# -- building blocks ---------------------------------------------------------

def build_model(cfg: RunConfig) -> ManifoldModel:
    mc = cfg["model"]
    if mc["kind"] == "sphere":
        return ManifoldModel.sphere(mc["N"], r0=mc["r0"])
    if mc["kind"] == "torus":
        return ManifoldModel.torus(mc["N"], L=mc["L"])
    return ManifoldModel.circle(mc["N"], L=mc["L"])


def build_initial(cfg: RunConfig, model: ManifoldModel) -> np.ndarray:
    ic = cfg["initial"]
    if ic["profile"] == "file":
        if not ic["file"]:
            raise UsageError("[initial] profile = file needs file = path")
        return load_profile_csv(ic["file"], ic["column"], model)
    params = {k: ic[k] for k in _PROFILE_KEYS if ic[k] is not None}
    if ic["profile"] == "barenblatt":
        params.setdefault("m", cfg["pme"]["m"])
    return initial_profile(model, ic["profile"], seed=ic["seed"], **params)


def build_env(cfg: RunConfig, model: ManifoldModel, v0: np.ndarray) -> FlowEnv:
    T = cfg["time"]["end"]
    K = run_ricci_bound(model, T)
    override = cfg["family"]["K"]
    if override is not None:
        if override < K:
            raise UsageError(f"[family] K = {override} is below the model's Ricci bound {K}")
        K = override
    return FlowEnv(K=K, M=float(np.max(v0)), T=T)


def build_triple(cfg: RunConfig, pme: PmeParameters, env: FlowEnv) -> FunctionTriple:
    fc = cfg["family"]
    name = fc["name"]
    if name == "liyau":
        return FunctionTriple.li_yau(pme, env, alpha=fc["alpha"], theta=fc["theta"])
    if name == "hamilton":
        return FunctionTriple.hamilton(pme, env)
    if name == "lixu":
        return FunctionTriple.li_xu(pme, env, phi_scale=fc["phi_scale"])
    if name == "linear_lixu":
        return FunctionTriple.linear_li_xu(pme, env, c=fc["c"])
    return FunctionTriple.sampled(pme, env, SampledTable.from_csv(fc["table"]))


@dataclass
class Setup:
    model: ManifoldModel
    pme: PmeParameters
    v0: np.ndarray
    env: FlowEnv
    triple: FunctionTriple


def prepare(cfg: RunConfig) -> Setup:
    model = _staged("config", build_model, cfg)
    pme = _staged("config", PmeParameters, cfg["pme"]["m"], model.n)
    v0 = _staged("config", build_initial, cfg, model)
    env = _staged("config", build_env, cfg, model, v0)
    triple = _staged("config", build_triple, cfg, pme, env)
    return Setup(model, pme, v0, env, triple)


# -- report bundle -----------------------------------------------------------

def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, NaN to null, inf to strings."""
    if isinstance(obj, Mapping):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def provenance(cfg: RunConfig) -> dict:
    prov = {"config_hash": cfg.digest(), "version": __version__,
            "numpy": np.__version__, "scipy": scipy.__version__}
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch:
        prov["timestamp"] = int(epoch)
    return prov


@dataclass
class ReportBundle:
    """Everything one invocation produced, plus a verdict per enabled check."""

    command: str
    config: dict
    provenance: dict
    conditions: ConditionReport | None = None
    estimate: EstimateSeries | None = None
    lemma: dict | None = None
    cutoff: dict | None = None
    convergence: dict | None = None
    trace: dict | None = None
    verdicts: dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def to_dict(self) -> dict:
        return _clean({
            "command": self.command,
            "config": self.config,
            "provenance": self.provenance,
            "conditions": None if self.conditions is None else self.conditions.to_dict(),
            "estimate": None if self.estimate is None else self.estimate.to_dict(),
            "lemma": self.lemma,
            "cutoff": self.cutoff,
            "convergence": self.convergence,
            "trace": self.trace,
            "verdicts": dict(sorted(self.verdicts.items())),
            "passed": self.passed,
        })


def _bundle(cfg: RunConfig, command: str) -> ReportBundle:
    return ReportBundle(command, cfg.canonical(), provenance(cfg))


def trace_summary(trace: RunTrace) -> dict:
    scale = float(np.max(np.abs(trace.step_max)))
    tol = 1e-12 * max(scale, 1.0)
    return {
        "steps": int(trace.dt_history.size),
        "snapshots": [float(t) for t in trace.times],
        "K": trace.env.K, "M": trace.env.M, "T": trace.env.T,
        "max_increase": float(np.max(np.diff(trace.step_max), initial=0.0)),
        "min_decrease": float(np.max(-np.diff(trace.step_min), initial=0.0)),
        "max_principle": bool(np.all(np.diff(trace.step_max) <= tol)
                              and np.all(np.diff(trace.step_min) >= -tol)),
    }


# -- commands ----------------------------------------------------------------

def check_conditions(cfg: RunConfig) -> ReportBundle:
    setup = prepare(cfg)
    report = _staged("admissibility", full_check, setup.triple)
    bundle = _bundle(cfg, "check-conditions")
    bundle.conditions = report
    bundle.verdicts["admissibility"] = report.passed
    return bundle


def solve_config(cfg: RunConfig, setup: Setup | None = None) -> RunTrace:
    setup = setup or prepare(cfg)
    tc = cfg["time"]
    return _staged("solve", solve, setup.model, setup.v0, setup.pme, (tc["start"], tc["end"]),
                   cfg.snapshot_times, safety=tc["safety"],
                   allow_degenerate=cfg["initial"]["profile"] == "barenblatt", K=setup.env.K)


def solve_only(cfg: RunConfig) -> tuple[ReportBundle, RunTrace]:
    trace = solve_config(cfg)
    bundle = _bundle(cfg, "solve")
    bundle.trace = trace_summary(trace)
    bundle.verdicts["max_principle"] = bundle.trace["max_principle"]
    return bundle, trace


def run(cfg: RunConfig, lemma: bool | None = None, cutoff: bool | None = None,
        command: str = "verify-estimate") -> ReportBundle:
    """admissibility -> solve -> estimate -> (lemma) -> (cutoff) -> report."""
    setup = prepare(cfg)
    bundle = _bundle(cfg, command)

    report = _staged("admissibility", full_check, setup.triple)
    bundle.conditions = report
    bundle.verdicts["admissibility"] = report.passed
    if not report.passed:
        bad = sorted(report.violations())
        exc = AdmissibilityError(f"triple {setup.triple.describe()} is not admissible: {bad}", bad)
        exc.stage = "admissibility"
        raise exc

    trace = solve_config(cfg, setup)
    bundle.trace = trace_summary(trace)

    ec = cfg["estimate"]
    mode = None if ec["mode"] == "auto" else RhsMode(ec["mode"])
    series = _staged("estimate", verify_estimate, trace, setup.triple, R=cfg.radius,
                     C=cfg.constant, mode=mode, center=ec["center"])
    bundle.estimate = series
    if cfg.constant is None:
        bundle.verdicts["estimate"] = math.isfinite(series.C_star)
    else:
        bundle.verdicts["estimate"] = bool(series.passed)

    if cfg["lemma"]["enabled"] if lemma is None else lemma:
        res = _staged("lemma", lemma33_residual, trace, setup.triple, form=cfg["lemma"]["form"])
        bundle.lemma = res.to_dict()
        bundle.verdicts["lemma"] = res.min_margin >= -cfg["lemma"]["tol"]

    if cfg["cutoff"]["enabled"] if cutoff is None else cutoff:
        _cutoff_into(bundle, cfg, setup.model)
    return bundle


def _cutoff_into(bundle: ReportBundle, cfg: RunConfig, model: ManifoldModel) -> None:
    cc = cfg["cutoff"]
    prof = _staged("cutoff", build_cutoff, model, cc["center"], cc["R"], cc["t"])
    check = verify_cutoff(prof, model, C_chi=cc["C_chi"])
    bundle.cutoff = {"R": cc["R"], "t": cc["t"], "center": cc["center"], "h": model.h,
                     **check.to_dict()}
    bundle.verdicts["cutoff"] = check.passed


def cutoff_test(cfg: RunConfig) -> ReportBundle:
    model = _staged("config", build_model, cfg)
    bundle = _bundle(cfg, "cutoff-test")
    _cutoff_into(bundle, cfg, model)
    return bundle


def convergence(cfg: RunConfig) -> ReportBundle:
    mc, cc = cfg["model"], cfg["convergence"]
    if cc["target"] not in ("auto", "sine", "polar_cosine"):
        raise UsageError(f"[convergence] unknown target {cc['target']!r}")
    table = _staged("solve", mms_study, mc["kind"], cfg.resolutions, cfg["pme"]["m"], cc["end"],
                    None, mc["L"], mc["r0"])
    bundle = _bundle(cfg, "convergence")
    bundle.convergence = {"model": mc["kind"], **table.to_dict()}
    bundle.verdicts["convergence"] = table.median_order >= cc["min_order"]
    return bundle


def lemma_residual(cfg: RunConfig) -> ReportBundle:
    return run(cfg, lemma=True, command="lemma-residual")


COMMANDS = {
    "check-conditions": check_conditions,
    "verify-estimate": run,
    "lemma-residual": lemma_residual,
    "cutoff-test": cutoff_test,
    "convergence": convergence,
}


# -- emission ----------------------------------------------------------------

def _write_rows(path: Path, header: Sequence[str], rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def emit(bundle: ReportBundle, out_dir: str | Path, fmt: str = "csv",
         prefix: str = "run") -> list[Path]:
    """Write the bundle as CSV tables or one JSON document."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written: list[Path] = []
        if fmt == "json":
            path = out / f"{prefix}.json"
            path.write_text(dumps(bundle.to_dict()) + "\n")
            return [path]
        if fmt != "csv":
            raise UsageError(f"unknown format {fmt!r}")
        if bundle.estimate is not None:
            path = out / f"{prefix}.csv"
            _write_rows(path, CSV_HEADER.split(","), bundle.estimate.rows())
            written.append(path)
        if bundle.conditions is not None:
            rep = bundle.conditions
            names = list(rep.margins)
            path = out / f"{prefix}_conditions.csv"
            cols = [rep.t] + [rep.margins[n] for n in names]
            if rep.ratio is not None:
                names.append("ratio")
                cols.append(rep.ratio)
            _write_rows(path, ["t"] + names, zip(*cols))
            written.append(path)
        if bundle.lemma is not None:
            path = out / f"{prefix}_lemma.csv"
            _write_rows(path, ["t", "min_margin"],
                        zip(bundle.lemma["t"], bundle.lemma["per_time_min"]))
            written.append(path)
        if bundle.cutoff is not None:
            path = out / f"{prefix}_cutoff.csv"
            keys = ["R", "t", "h", "c1", "c2", "C_chi"]
            _write_rows(path, keys, [[float(bundle.cutoff[k]) for k in keys]])
            written.append(path)
        if bundle.convergence is not None:
            conv = bundle.convergence
            path = out / f"{prefix}_convergence.csv"
            orders = [math.nan] + list(conv["orders"])
            _write_rows(path, ["N", "error", "order"],
                        zip(conv["resolutions"], conv["errors"], orders))
            written.append(path)
        return written
    except OSError as exc:
        raise UsageError(f"cannot write report to {out}: {exc}") from exc


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False)


def resolve_out_dir(flag: str | None, cfg: RunConfig | None = None) -> Path:
    """--out, then the config's [output] dir, then $PMERICCI_OUT, then the cwd."""
    if flag:
        return Path(flag)
    if cfg is not None and cfg["output"]["dir"]:
        return Path(cfg["output"]["dir"])
    return Path(os.environ.get(OUT_ENV) or ".")


# -- sweeps ------------------------------------------------------------------

def parse_axes(spec: str | Sequence[str]) -> dict[str, list[str]]:
    """``"pme.m=1.5,2,3; family.name=liyau,hamilton"`` -> ordered axes."""
    items = spec.split(";") if isinstance(spec, str) else list(spec)
    axes: dict[str, list[str]] = {}
    for item in items:
        item = item.strip()
        if not item:
            continue
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise UsageError(f"axis {item!r} must look like section.key=v1,v2,...")
        key, values = item.split("=", 1)
        vals = [v.strip() for v in values.split(",") if v.strip()]
        if not vals:
            raise UsageError(f"axis {key.strip()!r} is empty")
        axes[key.strip()] = vals
    if not axes:
        raise UsageError("a sweep needs at least one axis")
    return axes


@dataclass
class SweepResult:
    axes: dict[str, list[str]]
    rows: list[dict]
    bundles: list[dict | None]

    @property
    def exit_code(self) -> int:
        return max((r["exit_code"] for r in self.rows), default=0)

    def write_summary(self, path: str | Path) -> Path:
        path = Path(path)
        keys = list(self.axes)
        header = ["index", *keys, "verdict", "C_star", "min_margin", "exit_code", "stage"]
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in self.rows:
                w.writerow([r["index"], *[r["values"][k] for k in keys], r["verdict"],
                            _fmt(r["C_star"]), _fmt(r["min_margin"]), r["exit_code"],
                            r["stage"] or ""])
        return path

    def to_dict(self) -> dict:
        return {"axes": self.axes, "rows": self.rows, "bundles": self.bundles}


def _fmt(x):
    if x is None:
        return ""
    return repr(float(x))


def _sweep_one(args):
    index, base, overrides, command = args
    values = dict(overrides)
    row = {"index": index, "values": values, "verdict": "ERROR", "C_star": None,
           "min_margin": None, "exit_code": 3, "stage": None, "message": None}
    try:
        cfg = base.with_overrides(overrides)
        bundle = COMMANDS[command](cfg)
    except PmeError as exc:
        row.update(exit_code=exc.exit_code, stage=getattr(exc, "stage", "config"),
                   message=str(exc), verdict="FAIL" if exc.exit_code == 1 else "ERROR")
        return row, None
    est = bundle.estimate
    row.update(verdict="PASS" if bundle.passed else "FAIL", exit_code=bundle.exit_code)
    if est is not None:
        row["C_star"] = est.C_star if math.isfinite(est.C_star) else None
        row["min_margin"] = est.min_margin
    return row, bundle.to_dict()


def sweep(base: RunConfig, axes: Mapping[str, Sequence[str]] | str | None = None,
          jobs: int = 1, command: str = "verify-estimate") -> SweepResult:
    """Cartesian product of the axes, run independently.

    Results are ordered by axis index, so the summary does not depend on
    the number of workers or on completion order.
    """
    if axes is None or axes == "":
        axes = base["sweep"]["axes"]
    axes = parse_axes(axes) if isinstance(axes, (str, list)) else {
        k: [str(v) for v in vs] for k, vs in axes.items()}
    for key, vals in axes.items():
        if not vals:
            raise UsageError(f"axis {key!r} is empty")
        base.with_overrides({key: vals[0]})  # validates the key
    total = math.prod(len(v) for v in axes.values())
    cap = base["sweep"]["cap"]
    if total > cap:
        raise UsageError(f"sweep has {total} runs, above the cap of {cap}")
    if command not in COMMANDS:
        raise UsageError(f"cannot sweep command {command!r}")
    keys = list(axes)
    tasks = [(i, base, dict(zip(keys, combo)), command)
             for i, combo in enumerate(itertools.product(*axes.values()))]
    if jobs <= 1 or total == 1:
        results = [_sweep_one(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_one, tasks))
    results.sort(key=lambda r: r[0]["index"])
    return SweepResult(dict(axes), [r for r, _ in results], [b for _, b in results])
