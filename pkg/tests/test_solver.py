import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from pmericci import geometry as geo
from pmericci import solver as sv
from pmericci.errors import (DomainError, ExtinctionError, PositivityLossError, UsageError)
from pmericci.families import PmeParameters
from pmericci.geometry import ManifoldModel
from pmericci.solver import PressureField, initial_profile, solve


def test_pressure_conversions():
    assert np.all(sv.to_pressure(np.ones(4), 2.0) == 2.0)
    assert np.allclose(sv.to_pressure(np.full(3, 4.0), 3.0), 24.0)
    assert np.allclose(sv.from_pressure(np.full(3, 2.0), 2.0), 1.0)
    assert np.allclose(sv.from_pressure(np.full(3, 24.0), 3.0), 4.0)
    with pytest.raises(DomainError):
        sv.to_pressure(np.array([1.0, 0.0]), 2.0)


@given(v=arrays(float, 16, elements=st.floats(1e-3, 1e3)), m=st.floats(1.1, 4.0))
def test_pressure_roundtrip(v, m):
    assert np.allclose(sv.to_pressure(sv.from_pressure(v, m), m), v, rtol=1e-12)


@given(v=arrays(float, 8, elements=st.floats(1e-3, 10)), d=arrays(float, 8, elements=st.floats(0, 5)))
def test_from_pressure_monotone(v, d):
    assert np.all(sv.from_pressure(v, 2.5) <= sv.from_pressure(v + d, 2.5) + 1e-15)


def test_stable_dt_formula():
    model = ManifoldModel.circle(20, L=2.0)  # h = 0.1
    field = PressureField(np.full(20, 2.0), 0.0, model)
    assert sv.stable_dt(field, 2.0, 0.2) == pytest.approx(1e-3)
    double = PressureField(np.full(20, 4.0), 0.0, model)
    assert sv.stable_dt(double, 2.0, 0.2) == pytest.approx(0.5e-3)


def test_stable_dt_shrinks_toward_extinction():
    model = ManifoldModel.sphere(32, r0=1.0)
    v = np.full(32, 1.0)
    dts = [sv.stable_dt(PressureField(v, t, model), 2.0) for t in (0.0, 0.4, 0.499)]
    assert dts[0] > dts[1] > dts[2] > 0
    with pytest.raises(ExtinctionError):
        solve(model, v, PmeParameters(2.0, 2), (0.0, 0.5), [0.5])


def test_pressure_field_read_only():
    f = PressureField(np.ones(16), 0.0, ManifoldModel.circle(16))
    with pytest.raises(ValueError):
        f.values[0] = 2.0


@pytest.mark.parametrize("model", [ManifoldModel.circle(32), ManifoldModel.sphere(32)])
def test_constant_data_stays_constant(model):
    pme = PmeParameters(2.0, model.n)
    tr = solve(model, np.full(model.N, 1.0), pme, (0.0, 0.4), [0.1, 0.4])
    assert all(np.all(s.values == 1.0) for s in tr.snapshots)


def test_step_constant_exact():
    model = ManifoldModel.circle(32)
    f = PressureField(np.full(32, 2.5), 0.0, model)
    for _ in range(10):
        f = sv.step(f, 0.5 * sv.stable_dt(f, 2.0), 2.0)
    assert np.all(f.values == 2.5)


def test_step_rejects_unstable_dt():
    model = ManifoldModel.circle(32)
    f = PressureField(np.full(32, 2.0), 0.0, model)
    with pytest.raises(UsageError):
        sv.step(f, 10.0, 2.0)


def test_euler_step_local_error_is_second_order():
    # one step against a Richardson-extrapolated fine-step reference
    model = ManifoldModel.circle(64)
    x = model.coords
    f0 = PressureField(2.0 + 0.1 * np.sin(x), 0.0, model)

    def advance(dt, k):
        f = f0
        for _ in range(k):
            f = sv.step(f, dt / k, 2.0)
        return f.values

    errs = []
    for dt in (8e-4, 4e-4):
        ref = 2.0 * advance(dt, 64) - advance(dt, 32)
        errs.append(np.max(np.abs(advance(dt, 1) - ref)))
    assert math.log2(errs[0] / errs[1]) == pytest.approx(2.0, abs=0.2)


def test_time_reversal_smoke():
    # frozen-coefficient linearisation: v + dt*A(v) then - dt*A(.) returns within O(dt^2)
    model = ManifoldModel.circle(64)
    x = model.coords
    v = 2.0 + 0.3 * np.sin(x)
    for dt in (1e-3, 5e-4):
        fwd = v + dt * sv.pressure_rhs(model, v, 0.0, 2.0)
        back = fwd - dt * sv.pressure_rhs(model, fwd, 0.0, 2.0)
        err = np.max(np.abs(back - v))
        assert err < 50 * dt**2


def _random_run(seed, kind):
    model = ManifoldModel.circle(64) if kind == "circle" else ManifoldModel.sphere(64, r0=2.0)
    v0 = initial_profile(model, "random", seed=seed, c=2.0, amplitude=1.0, modes=5)
    return v0, solve(model, v0, PmeParameters(2.0, model.n), (0.0, 0.3), [0.3])


@pytest.mark.parametrize("kind", ["circle", "sphere"])
@given(seed=st.integers(0, 10_000))
def test_discrete_maximum_principle(kind, seed):
    v0, tr = _random_run(seed, kind)
    tol = 1e-12 * np.max(np.abs(v0))
    assert np.all(np.diff(tr.step_max) <= tol)
    assert np.all(np.diff(tr.step_min) >= -tol)
    assert tr.values.max() <= tr.env.M + tol


def test_solve_lands_on_snapshots_and_env():
    model = ManifoldModel.sphere(32, r0=2.0)
    v0 = initial_profile(model, "gaussian", base=1.0, amplitude=1.0, width=0.5)
    tr = solve(model, v0, PmeParameters(2.0, 2), (0.0, 0.5), [0.5, 0.1, 0.25])
    assert list(tr.times) == [0.1, 0.25, 0.5]
    assert tr.env.K == pytest.approx(1.0 / 3.0)
    assert tr.env.M == 2.0
    assert tr.env.T == 0.5
    assert tr.at(0.25).t == 0.25
    with pytest.raises(KeyError):
        tr.at(0.3)


def test_solve_k_override():
    model = ManifoldModel.circle(32)
    v0 = np.full(32, 1.0)
    pme = PmeParameters(2.0, 1)
    assert solve(model, v0, pme, (0, 0.1), [0.1], K=0.2).env.K == 0.2
    model = ManifoldModel.sphere(32, r0=2.0)
    with pytest.raises(UsageError):
        solve(model, np.full(32, 1.0), PmeParameters(2.0, 2), (0, 0.5), [0.5], K=0.1)


@pytest.mark.parametrize("kwargs", [
    dict(t_span=(1.0, 1.0), snaps=[1.0]),
    dict(t_span=(0.0, 1.0), snaps=[]),
    dict(t_span=(0.0, 1.0), snaps=[2.0]),
    dict(t_span=(0.0, 1.0), snaps=[0.5, 0.5]),
])
def test_solve_usage_errors(kwargs):
    model = ManifoldModel.circle(32)
    with pytest.raises(UsageError):
        solve(model, np.ones(32), PmeParameters(2.0, 1), kwargs["t_span"], kwargs["snaps"])


def test_dimension_mismatch():
    with pytest.raises(UsageError):
        solve(ManifoldModel.circle(32), np.ones(32), PmeParameters(2.0, 2), (0, 1), [1])


def test_nonpositive_data_rejected():
    model = ManifoldModel.circle(32)
    v0 = np.ones(32)
    v0[4] = 0.0
    with pytest.raises(DomainError):
        solve(model, v0, PmeParameters(2.0, 1), (0, 0.1), [0.1])
    solve(model, v0, PmeParameters(2.0, 1), (0, 0.01), [0.01], allow_degenerate=True)


def test_initial_profiles():
    c = ManifoldModel.circle(64)
    assert np.allclose(initial_profile(c, "sine", c=1.5, a=0.5), 1.5 + 0.5 * np.sin(c.coords))
    s = ManifoldModel.sphere(64)
    g = initial_profile(s, "gaussian", base=1.0, amplitude=1.0, width=0.5)
    assert g[0] == 2.0 and np.all(g >= 1.0)
    r1 = initial_profile(c, "random", seed=3)
    assert np.array_equal(r1, initial_profile(c, "random", seed=3))
    assert not np.array_equal(r1, initial_profile(c, "random", seed=4))
    assert np.min(r1) > 0
    with pytest.raises(UsageError):
        initial_profile(s, "sine")
    with pytest.raises(UsageError):
        initial_profile(c, "sine", k=1.5)
    with pytest.raises(UsageError):
        initial_profile(c, "nope")


def test_trace_csv_and_profile_loading(tmp_path):
    model = ManifoldModel.circle(16)
    tr = solve(model, np.full(16, 1.0), PmeParameters(2.0, 1), (0, 0.1), [0.05, 0.1])
    path = tmp_path / "trace.csv"
    tr.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,x,v" and len(lines) == 33
    prof = tmp_path / "v0.csv"
    prof.write_text("v\n" + "\n".join(str(1.0 + i / 100) for i in range(16)) + "\n")
    v = sv.load_profile_csv(prof, "v", model)
    assert v[3] == 1.03
    with pytest.raises(UsageError):
        sv.load_profile_csv(prof, "u", model)
