"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python3 tests/test_acceptance.py`` for the summary alone.
"""
import itertools
import json
import math
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from pmericci.estimates import build_cutoff, classical_ab_check, lemma33_residual, verify_cutoff, \
    verify_estimate
from pmericci.families import FlowEnv, FunctionTriple, PmeParameters, full_check
from pmericci.geometry import ManifoldModel
from pmericci.harness import runner
from pmericci.harness.config import load_config
from pmericci.harness.studies import mms_study
from pmericci.oracle import barenblatt_gate, barenblatt_interior, barenblatt_pressure
from pmericci.solver import initial_profile, solve


def _report(num, ok, detail, seconds):
    return f"[criterion {num:2d}] {'PASS' if ok else 'FAIL'}  {detail}  ({seconds:.1f}s)"


# -- criterion runners: each returns (passed, detail) ------------------------

def crit_appendix():
    t = np.logspace(-3, 1, 200)
    failed, checks, slowest = [], 0, 0.0
    start = time.perf_counter()
    for m, n, x in itertools.product((1.5, 2.0, 3.0), (1, 2, 3), (0.1, 1.0, 10.0)):
        pme = PmeParameters(m, n)
        env = FlowEnv(K=x / ((m - 1.0) * 1.0), M=1.0, T=10.0)
        triples = [(f"liyau(a={a},th={th})", FunctionTriple.li_yau(pme, env, a, th))
                   for a in (1.5, 2.0, 4.0) for th in (0.5, 1.0, 2.0)]
        triples += [("hamilton", FunctionTriple.hamilton(pme, env)),
                    ("lixu", FunctionTriple.li_xu(pme, env)),
                    ("linear_lixu", FunctionTriple.linear_li_xu(pme, env))]
        for name, tri in triples:
            checks += 1
            rep = full_check(tri, t, slack=1e-10)
            sup = rep.ratio_sup
            ratio_ok = name.startswith("liyau") or (sup is not None and math.isfinite(sup))
            if not (rep.passed and ratio_ok):
                failed.append((name.split("(")[0], x, sorted(rep.violations())))
    elapsed = time.perf_counter() - start
    by_family = {}
    for fam, x, bad in failed:
        entry = by_family.setdefault(fam, [0, set(), set()])
        entry[0] += 1
        entry[1].add(x)
        entry[2].update(bad)
    summary = "; ".join(f"{f}: {c} failing at (m-1)MK in {sorted(xs)} via {sorted(b)}"
                        for f, (c, xs, b) in sorted(by_family.items()))
    ok = not failed and elapsed <= 60
    return ok, f"{checks - len(failed)}/{checks} triples admissible" + (f" [{summary}]" if summary else "")


def crit_solver_order():
    circle = mms_study("circle", (64, 128, 256), m=2.0, T=0.5)
    sphere = mms_study("sphere", (64, 128, 256), m=2.0, T=0.5, r0=2.0)
    ok = circle.median_order >= 1.9 and sphere.median_order >= 1.9
    return ok, (f"median order circle {circle.median_order:.3f}, "
                f"sphere {sphere.median_order:.3f} (need >= 1.9)")


def barenblatt_run():
    model = ManifoldModel.circle(1024, L=16.0)
    v0 = initial_profile(model, "barenblatt", t0=1.0, m=2.0)
    snaps = [1.25, 1.5, 1.75, 2.0]
    return model, solve(model, v0, PmeParameters(2.0, 1), (1.0, 2.0), snaps,
                        allow_degenerate=True)


def crit_barenblatt():
    gate = barenblatt_gate(m=2.0)  # raises before any comparison if the oracle is wrong
    model, tr = barenblatt_run()
    x = model.coords - 8.0
    worst = 0.0
    for snap in tr.snapshots:
        exact = barenblatt_pressure(x, snap.t, 2.0)
        mask = barenblatt_interior(x, snap.t, 2.0)
        rel = np.max(np.abs(snap.values[mask] - exact[mask])) / np.max(np.abs(exact[mask]))
        worst = max(worst, float(rel))
    return worst <= 2e-2, f"gate residual {gate:.1e}; interior relative Linf error {worst:.2e} (need <= 2e-2)"


def crit_classical():
    model, tr = barenblatt_run()
    x = model.coords - 8.0
    mask = lambda t: barenblatt_interior(x, t, 2.0)
    upper = classical_ab_check(tr, mask=mask)
    lower = classical_ab_check(tr, mask=mask, lower=True)
    lo = float(min(lower.ratios.min(), upper.ratios.min()))
    hi = float(max(lower.ratios.max(), upper.ratios.max()))
    spread = float(np.max(upper.spread))
    ok = 0.98 <= lo and hi <= 1.02 and spread <= 0.02
    return ok, f"ratio range [{lo:.4f}, {hi:.4f}], Laplacian spread {spread:.2e} (need [0.98, 1.02], <= 2%)"


def circle_run(N=128, dt=0.05):
    model = ManifoldModel.circle(N)
    v0 = initial_profile(model, "sine", c=1.5, a=0.5)
    snaps = np.round(np.arange(1, int(round(1.0 / dt)) + 1) * dt, 12)
    return solve(model, v0, PmeParameters(2.0, 1), (0.0, 1.0), snaps)


def sphere_run(N=128, dt=0.05):
    model = ManifoldModel.sphere(N, r0=2.0)
    v0 = initial_profile(model, "gaussian", base=1.0, amplitude=1.0, width=0.5)
    snaps = np.round(np.arange(1, int(round(0.5 / dt)) + 1) * dt, 12)
    return solve(model, v0, PmeParameters(2.0, 2), (0.0, 0.5), snaps)


def crit_flat_estimate():
    tr = circle_run()
    tri = FunctionTriple.li_yau(tr.pme, tr.env, 2.0, 1.0)
    glob = verify_estimate(tr, tri, R=None, C=1.0)
    local = [verify_estimate(tr, tri, R=R, C=1.0) for R in (math.pi / 2, math.pi)]
    ok = bool(np.all(glob.sup_F < 0) and glob.passed and all(e.passed for e in local))
    return ok, (f"max sup F {glob.sup_F.max():.3f}; C=1 margins "
                f"R=pi/2 {local[0].min_margin:.3f}, R=pi {local[1].min_margin:.3f}")


def crit_curved_estimate():
    parts, ok = [], True
    runs = {N: sphere_run(N) for N in (128, 256)}
    for name in ("hamilton", "linear_li_xu"):
        cs, bare = [], []
        for N, tr in runs.items():
            es = verify_estimate(tr, getattr(FunctionTriple, name)(tr.pme, tr.env), R=None)
            cs.append(es.C_star)
            bare.append(es.bare_C_star)
        finite = all(math.isfinite(c) for c in cs)
        change = abs(cs[1] - cs[0]) / cs[1] if cs[1] > 0 else abs(cs[1] - cs[0])
        ok &= finite and change <= 0.2
        bchange = abs(bare[1] - bare[0]) / bare[1]
        parts.append(f"{name}: C* {cs[0]:.3g} -> {cs[1]:.3g} (change {change:.1%}), "
                     f"bare-LHS C* {bare[0]:.3f} -> {bare[1]:.3f} ({bchange:.1%})")
    return ok, "; ".join(parts)


def _lemma_ladder(make_run, family, T, form):
    common = np.round(np.arange(0.1, T - 1e-9, 0.05), 12)
    eps = []
    for N, dt in ((64, 0.05), (128, 0.0125), (256, 0.003125)):
        tr = make_run(N, dt)
        res = lemma33_residual(tr, family(tr.pme, tr.env), form=form)
        idx = [int(np.argmin(np.abs(res.t - c))) for c in common]
        assert np.allclose(res.t[idx], common)
        eps.append(max(0.0, -float(np.min(res.per_time_min()[idx]))))
    return eps


def _ladder_ok(eps):
    return all(b <= a / 1.5 for a, b in zip(eps, eps[1:]))


def crit_lemma():
    cases = [("circle/liyau", circle_run, lambda p, e: FunctionTriple.li_yau(p, e, 2.0, 1.0), 1.0),
             ("sphere/hamilton", sphere_run, FunctionTriple.hamilton, 0.5),
             ("sphere/linear_lixu", sphere_run, FunctionTriple.linear_li_xu, 0.5)]
    ok, parts = True, []
    for name, make, fam, T in cases:
        stated = _lemma_ladder(make, fam, T, "stated")
        free = _lemma_ladder(make, fam, T, "sign_free")
        ok &= _ladder_ok(stated)
        parts.append(f"{name} eps {', '.join(f'{e:.3g}' for e in stated)} "
                     f"(sign-free {', '.join(f'{e:.1g}' for e in free)})")
    return ok, "; ".join(parts)


def crit_cutoff():
    parts, ok = [], True
    flat = ManifoldModel.circle(1024, L=16.0)
    for R in (1.0, 2.0):
        c = verify_cutoff(build_cutoff(flat, 0.0, R), flat)
        ok &= c.c1 <= 16 + 10 * flat.h and c.c2 <= 32
        parts.append(f"circle R={R:g}: c1 {c.c1:.3f}, c2 {c.c2:.3f}")
    sphere = ManifoldModel.sphere(512, r0=2.0)
    c = verify_cutoff(build_cutoff(sphere, 0.0, 0.5, t=0.25), sphere, K=1.0 / 3.0)
    ok &= c.c1 <= 16 + 10 * sphere.h and c.c2 <= 32
    parts.append(f"sphere R=0.5 t=0.25: c1 {c.c1:.3f}, c2 {c.c2:.3f}")
    return ok, "; ".join(parts)


def crit_max_principle():
    worst, runs = -math.inf, 0
    for seed in range(20):
        for model in (ManifoldModel.circle(64), ManifoldModel.sphere(64, r0=2.0)):
            v0 = initial_profile(model, "random", seed=seed, c=2.0, amplitude=1.0, modes=5)
            tr = solve(model, v0, PmeParameters(2.0, model.n), (0.0, 0.3), [0.1, 0.3])
            scale = 1e-12 * np.max(np.abs(v0))
            worst = max(worst, float(np.max(np.diff(tr.step_max)) / scale),
                        float(np.max(-np.diff(tr.step_min)) / scale),
                        float((tr.values.max() - tr.env.M) / scale))
            runs += 1
    return worst <= 1.0, f"{runs} runs; worst violation {max(worst, 0.0):.2f} x 1e-12 ||v||"


def crit_determinism():
    cfg = load_config(None, ["model.N=64", "estimate.R=1", "lemma.enabled=true",
                             "cutoff.enabled=true", "cutoff.R=0.5"])
    blobs = []
    with tempfile.TemporaryDirectory() as tmp:
        for k in range(2):
            files = {}
            for fmt in ("csv", "json"):
                for p in runner.emit(runner.run(cfg), Path(tmp) / f"{fmt}{k}", fmt):
                    files[p.name] = p.read_bytes()
            blobs.append(files)
    json.loads(blobs[0]["run.json"])
    same = blobs[0] == blobs[1]
    return same, f"{len(blobs[0])} files byte-identical across two runs" if same else "outputs differ"


CRITERIA = {
    1: crit_appendix, 2: crit_solver_order, 3: crit_barenblatt, 4: crit_classical,
    5: crit_flat_estimate, 6: crit_curved_estimate, 7: crit_lemma, 8: crit_cutoff,
    9: crit_max_principle, 10: crit_determinism,
}


def evaluate(num):
    start = time.perf_counter()
    ok, detail = CRITERIA[num]()
    return ok, _report(num, ok, detail, time.perf_counter() - start)


@pytest.mark.parametrize("num", sorted(CRITERIA))
def test_criterion(num, capsys):
    ok, line = evaluate(num)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [evaluate(n) for n in sorted(CRITERIA)]
    for _, line in results:
        print(line)
    print(f"{sum(ok for ok, _ in results)}/{len(results)} criteria pass")
