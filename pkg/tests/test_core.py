import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ktz.core import (Boundary, GridSpec, Params, RhsKernel, VelocityField, laplacian,
                      rhs, source_coefficient)


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec(15, 1.0)
    with pytest.raises(ValueError):
        GridSpec(8, 1.0)
    with pytest.raises(ValueError):
        GridSpec(32, -1.0)
    g = GridSpec(32, 64.0)
    assert g.dx == 2.0 and g.center == (32.0, 32.0)
    assert g.axis()[0] == 1.0


def test_params_validation():
    with pytest.raises(ValueError):
        Params(nu1=0.0, q=1, alpha1=1)
    with pytest.raises(ValueError):
        Params(nu1=1, q=float("nan"), alpha1=1)
    p = Params(nu1=2.0, q=1, alpha1=3, c1=0.5, c2=-2)
    assert p.nu2 == 1.0 and p.alpha2 == -6.0
    with pytest.raises(ValueError):
        Params(nu1=1, q=1, alpha1=1, l0=200, basin_profile="disk").check_grid(GridSpec(16, 100.0))


def test_source_uniform_and_disk():
    g = GridSpec(64, 1000.0)
    assert source_coefficient(Params(1, 1.0, 1), 3.0, 7.0, g) == 1.0
    p = Params(1, 1.0, 1, l0=500.0, basin_profile="disk")
    assert abs(source_coefficient(p, 500.0, 500.0, g) - 1.0) < 1e-6
    assert abs(source_coefficient(p, 750.0, 500.0, g)) < 1e-15
    assert abs(source_coefficient(p, 1000.0, 1000.0, g) + 1.0) < 1e-6
    # negative q keeps a subcritical exterior
    p = p.with_(q=-2.0)
    assert source_coefficient(p, 0.0, 0.0, g) == pytest.approx(-2.0)


@pytest.mark.parametrize("boundary", list(Boundary))
@given(c=st.floats(-1e6, 1e6, allow_nan=False))
@settings(max_examples=30, deadline=None)
def test_laplacian_of_constant_is_zero(boundary, c):
    g = GridSpec(16, 7.3, boundary)
    assert np.all(laplacian(np.full((16, 16), c), g) == 0.0)


def _sine_error(n):
    L = 10.0
    g = GridSpec(n, L, Boundary.PERIODIC)
    X, _ = g.mesh()
    a = np.sin(2 * np.pi * X / L)
    return np.max(np.abs(laplacian(a, g) + (2 * np.pi / L) ** 2 * a))


def test_laplacian_second_order():
    e = [_sine_error(n) for n in (32, 64, 128)]
    for coarse, fine in zip(e, e[1:]):
        assert 3.2 <= coarse / fine <= 4.8


def _random_field(g, seed):
    rng = np.random.default_rng(seed)
    return VelocityField(g, rng.normal(size=(g.n, g.n)), rng.normal(size=(g.n, g.n)))


@given(phase=st.floats(0, 2 * np.pi), seed=st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_rhs_phase_equivariance(phase, seed):
    g = GridSpec(16, 16.0)
    p = Params(1.0, 0.7, 1.3, c1=0.4, c2=-0.8)
    f = _random_field(g, seed)
    rot = VelocityField.from_complex(g, np.exp(1j * phase) * f.phi)
    lhs = rhs(rot, p)
    ref = np.exp(1j * phase) * rhs(f, p)
    assert np.allclose(lhs, ref, rtol=0, atol=1e-12 * np.max(np.abs(ref)))


def test_rhs_fixed_points():
    g = GridSpec(16, 16.0, Boundary.PERIODIC)
    p = Params(1.0, 1.0, 1.0)
    assert np.all(rhs(VelocityField.zeros(g), p) == 0)
    plateau = VelocityField.from_complex(g, np.ones((16, 16), complex))
    assert np.max(np.abs(rhs(plateau, p))) == 0.0
    # c2 != 0: pure rotation at frequency c2 q
    p = Params(1.0, 2.0, 0.5, c2=0.7)
    R = np.sqrt(p.q / p.alpha1)
    f = VelocityField.from_complex(g, np.full((16, 16), R + 0j))
    assert np.allclose(rhs(f, p), -1j * p.c2 * p.q * R, atol=1e-14)


@pytest.mark.parametrize("boundary", list(Boundary))
def test_rhs_backends_and_workers_bit_identical(boundary):
    g = GridSpec(48, 30.0, boundary)
    p = Params(0.8, 1.0, 1.0, c1=0.3, c2=-0.6, l0=20.0, basin_profile="disk")
    f = _random_field(g, 3)
    ref = rhs(f, p, workers=1, backend="numpy")
    for backend in ("numpy", "numba"):
        for w in (1, 3, 8):
            out = rhs(f, p, workers=w, backend=backend)
            assert out.tobytes() == ref.tobytes()


def test_kernel_context_manager():
    g = GridSpec(16, 16.0)
    p = Params(1.0, 1.0, 1.0)
    f = _random_field(g, 0)
    with RhsKernel(g, p, workers=2) as k:
        r, i = k(f.re, f.im)
    assert np.array_equal(r + 1j * i, rhs(f, p))
