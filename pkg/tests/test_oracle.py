import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pmericci import geometry as geo
from pmericci.errors import DomainError, OracleGateError, UsageError
from pmericci.families import PmeParameters
from pmericci.geometry import ManifoldModel
from pmericci.harness.studies import mms_study
from pmericci.oracle import (ManufacturedSolution, barenblatt_gate, barenblatt_interior,
                             barenblatt_laplacian, barenblatt_pressure, barenblatt_residual,
                             barenblatt_support_radius, convergence_order, exact_operators,
                             mms_forcing)


def test_gate_passes():
    assert barenblatt_gate() <= 1e-6


def test_gate_raises_on_tiny_tolerance():
    with pytest.raises(OracleGateError):
        barenblatt_gate(tol=1e-30)


@pytest.mark.parametrize("m", [1.5, 2.0, 3.0])
def test_residual_vanishes_inside_support(m):
    t = 1.7
    r = barenblatt_support_radius(t, m)
    x = np.linspace(-0.8 * r, 0.8 * r, 11)
    assert np.max(np.abs(barenblatt_residual(x, t, m))) < 1e-6


@given(lam=st.floats(0.2, 5.0), x=st.floats(-2.0, 2.0), t=st.floats(0.5, 3.0),
       m=st.floats(1.2, 3.0))
def test_self_similarity(lam, x, t, m):
    k = 1.0 / (m - 1.0 + 2.0)
    lhs = lam ** (k * (m - 1.0)) * barenblatt_pressure(lam**k * x, lam * t, m)
    assert lhs == pytest.approx(barenblatt_pressure(x, t, m), rel=1e-10, abs=1e-12)


def test_laplacian_constant_inside_support():
    t, m = 1.3, 2.0
    r = barenblatt_support_radius(t, m)
    x = np.linspace(-0.7 * r, 0.7 * r, 9)
    d = 1e-3
    lap = (barenblatt_pressure(x + d, t, m) - 2 * barenblatt_pressure(x, t, m)
           + barenblatt_pressure(x - d, t, m)) / d**2
    assert np.allclose(lap, barenblatt_laplacian(t, m), rtol=1e-6)
    pme = PmeParameters(m, 1)
    assert -(m - 1) * barenblatt_laplacian(t, m) * t == pytest.approx(pme.a_euclid)


def test_support_and_mask():
    t, m = 2.0, 2.0
    r = barenblatt_support_radius(t, m)
    assert barenblatt_pressure(r * 1.0001, t, m) == 0.0
    assert barenblatt_pressure(0.999 * r, t, m) > 0.0
    mask = barenblatt_interior(np.array([0.0, 0.49 * r, 0.51 * r]), t, m)
    assert mask.tolist() == [True, True, False]


def test_barenblatt_domain():
    with pytest.raises(DomainError):
        barenblatt_pressure(0.0, 0.0, 2.0)
    with pytest.raises(UsageError):
        barenblatt_pressure(0.0, 1.0, 2.0, n=2)


def test_constant_target_has_zero_forcing():
    model = ManifoldModel.sphere(32)
    f = mms_forcing(ManufacturedSolution.constant(2.0), model, PmeParameters(2.0, 2))
    assert np.all(f(model.coords, 0.3) == 0.0)


def test_sine_forcing_closed_form():
    model = ManifoldModel.circle(64)
    x, t = model.coords, 0.4
    f = mms_forcing(ManufacturedSolution.sine(), model, PmeParameters(2.0, 1))(x, t)
    e = math.exp(-t)
    expected = -e * np.sin(x) + e * np.sin(x) * (2 + e * np.sin(x)) - e**2 * np.cos(x) ** 2
    assert np.allclose(f, expected, rtol=0, atol=1e-14)


def test_sphere_forcing_against_finite_differences():
    model = ManifoldModel.sphere(64, r0=2.0)
    tgt = ManufacturedSolution.polar_cosine()
    th = np.linspace(0.3, 2.8, 13)
    t, d = 0.2, 1e-4
    s = model.metric_scale(t)
    v = lambda th_, t_: tgt.value(th_, t_)
    vt = (v(th, t + d) - v(th, t - d)) / (2 * d)
    vth = (v(th + d, t) - v(th - d, t)) / (2 * d)
    vthth = (v(th + d, t) - 2 * v(th, t) + v(th - d, t)) / d**2
    lap = (vthth + np.cos(th) / np.sin(th) * vth) / s
    fd = vt - v(th, t) * lap - vth**2 / s
    f = mms_forcing(tgt, model, PmeParameters(2.0, 2))(th, t)
    assert np.max(np.abs(f - fd)) <= 1e-6


def test_exact_operators_pole_limit():
    model = ManifoldModel.sphere(32)
    tgt = ManufacturedSolution.polar_cosine(a=1.0)
    _, _, lap, g2 = exact_operators(tgt, model, np.array([0.0, 1e-7]), 0.0)
    assert lap[0] == pytest.approx(lap[1], rel=1e-6)
    assert g2[0] == 0.0


def test_forcing_rejects_nonpositive_target():
    model = ManifoldModel.circle(32)
    f = mms_forcing(ManufacturedSolution.sine(c=0.5, a=1.0), model, PmeParameters(2.0, 1))
    with pytest.raises(DomainError):
        f(model.coords, 0.0)


def test_convergence_geometric_sequence():
    tab = convergence_order([4e-2, 1e-2, 2.5e-3])
    assert tab.orders == pytest.approx([2.0, 2.0])
    assert tab.median_order == pytest.approx(2.0)
    assert not tab.warning
    assert len(list(tab.rows())) == 3


def test_convergence_warning_on_stagnation():
    with pytest.warns(RuntimeWarning):
        tab = convergence_order([1e-2, 1e-2, 2e-2])
    assert tab.warning and tab.median_order <= 0


def test_convergence_needs_three():
    with pytest.raises(UsageError):
        convergence_order([1e-2, 1e-3])


def test_mms_sine_order():
    assert mms_study("circle", (32, 64, 128), T=0.2).median_order >= 1.9


def test_first_order_gradient_is_detected(monkeypatch):
    # negative control: a one-sided gradient must show up as order ~1
    def forward(model, f):
        f = np.asarray(f, dtype=float)
        return (np.roll(f, -1) - f) / model.h

    monkeypatch.setattr(geo, "coordinate_gradient", forward)
    order = mms_study("circle", (32, 64, 128), T=0.2).median_order
    assert order == pytest.approx(1.0, abs=0.15)
