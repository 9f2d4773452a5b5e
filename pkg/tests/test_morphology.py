import numpy as np
import pytest

from ktz import morphology as M
from ktz.core import GridSpec, Params, VelocityField
from ktz.initcond import SpiralSpec, make_spiral
from ktz.integrator import RunConfig, run

G = GridSpec(64, 1000.0)
P = Params(1.0, 1.0, 1.0, l0=500.0)


def tanh_vortex(grid, w, center=None, m=1, amp=1.0):
    r, th = grid.polar(center)
    return VelocityField.from_complex(grid, amp * np.tanh(r / w) * np.exp(1j * m * th))


@pytest.mark.parametrize("w", [30.0, 45.0, 60.0])
def test_tanh_core_oracle(w):
    f = tanh_vortex(G, w)
    geo = M.profile_core(f.phi, G, G.center, 500.0, 1e-3, inner=0.1, outer=0.9)
    assert abs(geo.inner_d - 2 * w * np.arctanh(0.1)) <= G.dx
    assert abs(geo.outer_d - 2 * w * np.arctanh(0.9)) <= G.dx
    geo = M.core_geometry(f, P)
    assert abs(geo.inner_d - 2 * w * np.arctanh(M.INNER_FRACTION)) <= G.dx
    assert abs(geo.outer_d - 2 * w * np.arctanh(M.OUTER_FRACTION)) <= G.dx


def test_core_lengths_stable_under_refinement():
    coarse = M.core_geometry(tanh_vortex(G, 50.0), P)
    g2 = GridSpec(128, 1000.0)
    fine = M.core_geometry(tanh_vortex(g2, 50.0), P)
    assert abs(coarse.inner_d - fine.inner_d) < 2 * G.dx
    assert abs(coarse.outer_d - fine.outer_d) < 2 * G.dx


def test_find_center_off_grid():
    c = (520.3, 480.7)
    f = tanh_vortex(G, 50.0, center=c)
    x, y = M.find_center(f, P)
    assert np.hypot(x - c[0], y - c[1]) < 0.25 * G.dx


def test_singularities_of_spiral():
    pts = M.singularities(make_spiral(G, SpiralSpec(m=-2, amplitude=1.0)))
    assert sum(q for *_, q in pts) == -2


def test_two_cores_are_ambiguous():
    a = tanh_vortex(G, 30.0, center=(420.0, 500.0)).phi
    b = tanh_vortex(G, 30.0, center=(580.0, 500.0)).phi
    with pytest.raises(M.AmbiguousCore):
        M.find_center(VelocityField.from_complex(G, a * b), P)


def test_first_crossing():
    r = np.arange(5.0)
    prof = np.array([0.0, 0.2, 0.6, 1.0, 1.0])
    assert M.first_crossing(r, prof, 0.4) == pytest.approx(1.5)
    assert M.first_crossing(r, prof, 2.0) is None
    assert M.first_crossing(r, prof[::-1], 0.4, start=1.0, rising=False) == pytest.approx(2.5)


@pytest.mark.parametrize("lam", [40.0, 60.0, 90.0])
def test_ring_width_exponential_oracle(lam):
    r, _ = G.polar()
    p = -np.exp(-r / lam)
    pf = M.PressureField(G, p, np.zeros((2, 64, 64)))
    assert abs(M.pressure_ring_width(pf, G.center) - lam * np.log(10.0)) <= G.dx


def test_ring_width_needs_depression():
    pf = M.PressureField(G, np.zeros((64, 64)), np.zeros((2, 64, 64)))
    with pytest.raises(M.NoDepression):
        M.pressure_ring_width(pf, G.center)


def test_trivial_pressure_fields_agree():
    z = VelocityField.zeros(G)
    a, b = M.pressure_np(z, P), M.pressure_p(z)
    for pf in (a, b):
        assert not np.any(pf.p) and not np.any(pf.grad_p)


def test_plateau_balance_has_no_np_pressure():
    f = VelocityField.from_complex(G, np.ones((64, 64), complex))
    pf = M.pressure_np(f, P)
    assert not np.any(pf.grad_p) and not np.any(pf.p)
    pp = M.pressure_p(VelocityField.from_complex(G, np.full((64, 64), 2.0 + 0j)))
    assert not np.any(pp.p)


def test_bernoulli_centre_above_far_field():
    R = 1.5
    pf = M.pressure_p(tanh_vortex(G, 40.0, amp=R))
    centre = pf.p[31:33, 31:33].mean()
    assert abs(centre - R * R / 2) < 0.05 * R * R


def test_poisson_solver_inverts_operator():
    A, _ = M._poisson_lu(G)
    x = np.random.default_rng(0).normal(size=G.n * G.n)
    b = (A @ x).reshape(64, 64)
    assert np.allclose(M.solve_poisson(b, G).ravel(), x, atol=1e-9)
    assert not np.any(M.solve_poisson(np.zeros((64, 64)), G))


def test_solver_fail_surfaces(monkeypatch):
    monkeypatch.setattr(M, "POISSON_RTOL", 0.0)
    with pytest.raises(M.SolverFail):
        M.solve_poisson(np.ones((64, 64)), G)


def test_np_gradient_peaks_in_core_for_uniform_source():
    p = Params((2 * G.dx) ** 2, 1.0, 1.0, c1=0.3, c2=0.3, l0=500.0)
    f = run(make_spiral(G, SpiralSpec(), p), p, RunConfig(t_end=10.0)).snapshots[-1]
    g = np.hypot(*M.pressure_np(f, p).grad_p)
    j, i = np.unravel_index(np.argmax(g), g.shape)
    x, y = (i + 0.5) * G.dx, (j + 0.5) * G.dx
    outer = M.core_geometry(f, p).outer_d
    assert np.hypot(x - 500.0, y - 500.0) <= outer


def test_reports_on_developed_run(developed_run):
    params, out = developed_run
    reports = M.morphology_reports(out.snapshots[-1], params)
    assert [r.mode for r in reports] == list(M.Mode)
    for r in reports:
        assert r.charge == 1
        assert r.inner_core_diameter_m <= r.outer_core_diameter_m <= r.zone_diameter_m
        assert r.pressure_ring_width_m < params.l0
    v = reports[0]
    assert v.zone_diameter_m < params.l0
    assert np.hypot(v.core_center[0] - 500.0, v.core_center[1] - 500.0) < G.dx
