import pytest

from ktz.core import GridSpec, Params
from ktz.initcond import SpiralSpec, make_spiral
from ktz.integrator import RunConfig, run

# desk-scale tornado basin: 1 km box, 500 m basin, healing length 2 dx
N, SIZE, L0 = 64, 1000.0, 500.0
DX = SIZE / N
NU1 = (2 * DX) ** 2


def basin_params(**kw):
    base = dict(nu1=NU1, q=1.0, alpha1=1.0, c1=0.3, c2=0.3, l0=L0, basin_profile="disk")
    base.update(kw)
    return Params(**base)


@pytest.fixture(scope="session")
def basin_grid():
    return GridSpec(N, SIZE)


@pytest.fixture(scope="session")
def developed_run(basin_grid):
    """m=1 spiral in the disk basin integrated to t=20, snapshot every 1."""
    params = basin_params()
    initial = make_spiral(basin_grid, SpiralSpec(m=1), params)
    out = run(initial, params, RunConfig(t_end=20.0, snapshot_every=1.0))
    return params, out


_ACCEPTANCE = []


@pytest.fixture
def verdict():
    """Record one acceptance line: verdict(n, ok, detail)."""
    def record(n, ok, detail):
        line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE.append(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
