import numpy as np
import pytest

from ktz.core import Boundary, GridSpec, Params, VelocityField
from ktz.initcond import SpiralSpec, make_plane_wave, make_spiral
from ktz.integrator import (SERIES_COLUMNS, RunConfig, Status, StepUnstable, auto_dt, run,
                            step)


def homogeneous(n=16, R=1.0, L=16.0):
    g = GridSpec(n, L, Boundary.PERIODIC)
    return VelocityField.from_complex(g, np.full((n, n), R + 0j))


def test_auto_dt_formula():
    g = GridSpec(32, 32.0)
    p = Params(2.0, 1.0, 1.0, c1=np.sqrt(3.0))
    assert auto_dt(g, p) == pytest.approx(0.2 / (4 * 2.0 * 2.0))


def test_step_zero_fixed_point_and_guard():
    g = GridSpec(16, 16.0)
    p = Params(1.0, 1.0, 1.0)
    z = VelocityField.zeros(g)
    out = step(z, p, auto_dt(g, p))
    assert not np.any(out.re) and not np.any(out.im)
    assert out.time == pytest.approx(auto_dt(g, p))
    with pytest.raises(ValueError):
        step(z, p, 2 * auto_dt(g, p))


def test_step_reports_nonfinite():
    f = homogeneous()
    f.re[3, 3] = np.inf
    with pytest.raises(StepUnstable):
        step(f, Params(1.0, 1.0, 1.0), 0.01)


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(t_end=-1.0)
    with pytest.raises(ValueError):
        RunConfig(t_end=1.0, dt=0.1, snapshot_every=0.05)
    with pytest.raises(ValueError):
        RunConfig(t_end=1.0, seed=-1)


def test_homogeneous_oracle():
    p = Params(1.0, 1.0, 1.0, c2=0.5)
    T = 10.0
    out = run(homogeneous(), p, RunConfig(t_end=T))
    f = out.snapshots[-1]
    assert out.status is Status.COMPLETED and f.time == pytest.approx(T)
    assert np.max(np.abs(f.amplitude() - 1.0)) < 1e-6
    phase = np.angle(f.phi * np.exp(1j * p.c2 * p.q * T))
    assert np.max(np.abs(phase)) < 1e-5


def _homogeneous_error(dt):
    p = Params(1.0, 1.0, 1.0, c2=0.5)
    T = 10.0
    f = run(homogeneous(), p, RunConfig(t_end=T, dt=dt)).snapshots[-1]
    return np.max(np.abs(f.phi - np.exp(-1j * p.c2 * p.q * T)))


def test_fourth_order_in_time():
    e = [_homogeneous_error(dt) for dt in (0.4, 0.2, 0.1)]
    for coarse, fine in zip(e, e[1:]):
        assert 10.0 <= coarse / fine <= 24.0


def test_linear_mode_semi_discrete():
    # exact for the discrete operator: k^2 -> (2/dx sin(k dx/2))^2
    g = GridSpec(32, 2 * np.pi, Boundary.PERIODIC)
    p = Params(0.05, 0.4, 0.0, c1=0.8)
    f0 = make_plane_wave(g, (2, 1), 0.5)
    T = 1.0
    f = run(f0, p, RunConfig(t_end=T)).snapshots[-1]
    k2 = sum((2 / g.dx * np.sin(k * g.dx / 2)) ** 2 for k in (2.0, 1.0))
    exact = f0.phi * np.exp((p.q - p.nu1 * k2) * T - 1j * p.nu1 * p.c1 * k2 * T)
    assert np.max(np.abs(f.phi - exact)) < 1e-10


def test_decay_when_subcritical():
    g = GridSpec(32, 32.0)
    p = Params(1.0, -0.5, 1.0)
    f0 = make_spiral(g, SpiralSpec(m=0, amplitude=0.1, noise_eps=0.5, seed=4))
    out = run(f0, p, RunConfig(t_end=5.0, snapshot_every=0.5))
    amps = [row[1] for row in out.series]
    assert out.status is Status.COMPLETED
    assert all(b <= a for a, b in zip(amps, amps[1:]))
    assert amps[-1] < 0.2 * amps[0]


def test_snapshot_schedule_and_series():
    g = GridSpec(16, 16.0)
    p = Params(1.0, 1.0, 1.0)
    f0 = make_spiral(g, SpiralSpec(), p)
    out = run(f0, p, RunConfig(t_end=1.0, snapshot_every=0.3))
    assert [round(s.time, 12) for s in out.snapshots] == [0.0, 0.3, 0.6, 0.9, 1.0]
    assert all(len(r) == len(SERIES_COLUMNS) for r in out.series)
    assert [r[0] for r in out.series] == [s.time for s in out.snapshots]


def test_plateau_reached_in_stable_spiral():
    g = GridSpec(64, 1000.0)
    p = Params((2 * g.dx) ** 2, 1.0, 1.0, c1=0.3, c2=0.3)
    out = run(make_spiral(g, SpiralSpec(), p), p, RunConfig(t_end=20.0))
    assert out.status is Status.COMPLETED
    assert abs(out.series[-1][1] - p.plateau()) < 0.05 * p.plateau()


def test_blowup_homogeneous_matches_closed_form():
    # |Phi|' = q|Phi| + |alpha1||Phi|^3 blows up at t* = ln(1 + q/(|alpha1| A0^2)) / (2q)
    p = Params(1.0, 1.0, -1.0)
    out = run(homogeneous(), p, RunConfig(t_end=5.0, dt=1e-3, blowup_threshold=1e3))
    assert out.status is Status.BLOWUP
    t_star = 0.5 * np.log(2.0)
    assert t_star < out.t_blow < t_star + 0.01
    assert np.isfinite(out.max_amp) and out.max_amp >= 1e3
    assert out.snapshots[-1].time == out.t_blow


def test_diverged_when_every_retry_overflows():
    # the cubic term overflows for any dt, so halving reaches the floor
    f0 = homogeneous(R=1e200)
    out = run(f0, Params(1.0, 1.0, 1.0), RunConfig(t_end=1.0, blowup_threshold=1e300))
    assert out.status is Status.DIVERGED
    assert out.dt_final < auto_dt(f0.grid, Params(1.0, 1.0, 1.0)) / 32
    assert all(s.is_finite() for s in out.snapshots)


def test_unstable_dt_is_halved_not_crashed():
    g = GridSpec(16, 16.0)
    p = Params(1.0, 0.0, 0.0)
    f0 = make_spiral(g, SpiralSpec(amplitude=1.0, noise_eps=0.3, seed=1))
    out = run(f0, p, RunConfig(t_end=50.0, dt=40 * auto_dt(g, p), blowup_threshold=1e300))
    assert out.status is not Status.COMPLETED or out.snapshots[-1].is_finite()
    assert all(s.is_finite() for s in out.snapshots)


@pytest.mark.parametrize("workers", [2, 5])
def test_run_bit_identical_across_workers(workers):
    g = GridSpec(32, 500.0)
    p = Params((2 * g.dx) ** 2, 1.0, 1.0, c1=0.5, c2=-0.4, l0=250.0, basin_profile="disk")
    f0 = make_spiral(g, SpiralSpec(noise_eps=0.01, seed=9), p)
    cfg = RunConfig(t_end=2.0, snapshot_every=1.0)
    a = run(f0, p, cfg, workers=1)
    b = run(f0, p, cfg, workers=workers)
    for x, y in zip(a.snapshots, b.snapshots):
        assert x.re.tobytes() == y.re.tobytes() and x.im.tobytes() == y.im.tobytes()
