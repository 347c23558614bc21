import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nematic_or.errors import DomainError, GridSizeError
from nematic_or.grid import DEFAULT_N_CELLS, Grid

n_cells = st.integers(min_value=3, max_value=400)


def test_default_grid():
    g = Grid()
    assert g.n_cells == DEFAULT_N_CELLS == 256
    assert g.n_nodes == 257
    assert g.h == pytest.approx(2.0 / 256)
    assert g.y[0] == -1.0 and g.y[-1] == 1.0
    assert g.center == 128 and g.y[g.center] == 0.0


@given(n_cells)
def test_nodes_are_mirror_symmetric(n):
    g = Grid(n)
    assert np.array_equal(g.y, -g.y[::-1])
    assert (g.center is None) == (n % 2 == 1)


def test_too_small_grid():
    with pytest.raises(GridSizeError):
        Grid(1)


def test_field_shape_checked():
    g = Grid(8)
    with pytest.raises(GridSizeError):
        g.d1(np.zeros(5))
    with pytest.raises(ValueError):
        g.field([np.nan] * 9)


def test_d1_examples():
    g = Grid(50)
    assert np.all(g.d1(np.full(51, 5.0)) == 0.0)
    assert np.allclose(g.d1(g.y), 1.0, rtol=0, atol=1e-12)


def test_d1_order_on_cubic():
    errs = []
    for n in (64, 128):
        g = Grid(n)
        errs.append(np.max(np.abs(g.d1(g.y**3) - 3 * g.y**2)[1:-1]))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=1e-6)


def test_d2_examples():
    g = Grid(40)
    assert np.allclose(g.d2(g.y**2), 2.0, rtol=0, atol=1e-12)
    assert np.allclose(g.d2(np.full(41, -3.0)), 0.0, atol=1e-12)
    g = Grid(256)
    assert np.max(np.abs(g.d2(np.sin(math.pi * g.y)) + math.pi**2 * np.sin(math.pi * g.y))) < 1e-3


@given(n_cells, st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_stencils_exact_on_low_degree(n, a, b, c):
    g = Grid(n)
    assert np.allclose(g.d1(np.full(g.n_nodes, a)), 0.0, atol=1e-12)
    assert np.allclose(g.d2(np.full(g.n_nodes, a)), 0.0, atol=1e-12 * max(1, n * n))
    assert np.allclose(g.d1(a + b * g.y), b, atol=1e-12 * max(1.0, n * abs(a)))
    quad = a + b * g.y + c * g.y**2
    # the h**-2 scaling amplifies rounding in the nodal values
    tol = 1e-12 + 8 * np.finfo(float).eps * (abs(a) + abs(b) + abs(c)) * n * n
    assert np.allclose(g.d2(quad), 2 * c, rtol=0, atol=tol)


def test_integrate_examples():
    g = Grid(256)
    assert g.integrate(np.ones(257)) == pytest.approx(2.0, abs=1e-14)
    assert abs(g.integrate(g.y)) < 1e-15
    assert g.integrate(g.y**2) == pytest.approx(2.0 / 3.0, abs=1e-4)


@given(n_cells, st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=1))
def test_integrate_odd_fields_vanish(n, seed):
    g = Grid(n)
    rng = np.random.default_rng(abs(int(seed[0] * 1000)))
    f = rng.normal(size=g.n_nodes) * 100
    odd = 0.5 * (f - f[::-1])
    assert abs(g.integrate(odd)) < 1e-12 * max(1.0, np.abs(odd).max())


def _order(op, exact, f):
    errs = []
    for n in (64, 128):
        g = Grid(n)
        errs.append(np.max(np.abs(op(g, f(g.y)) - exact(g.y))))
    return math.log2(errs[0] / errs[1])


def test_convergence_orders():
    f = lambda y: np.exp(np.sin(2 * y))
    d1 = lambda y: 2 * np.cos(2 * y) * f(y)
    d2 = lambda y: (4 * np.cos(2 * y) ** 2 - 4 * np.sin(2 * y)) * f(y)
    assert _order(lambda g, v: g.d1(v), d1, f) >= 1.9
    assert _order(lambda g, v: g.d2(v), d2, f) >= 1.9
    exact = 2.0 * math.sinh(1.0)
    errs = [abs(Grid(n).integrate(np.cosh(Grid(n).y)) - exact) for n in (64, 128)]
    assert math.log2(errs[0] / errs[1]) >= 1.9


def test_cumulative_matches_integrate():
    g = Grid(33)
    f = np.cos(g.y)
    c = g.cumulative(f)
    assert c[0] == 0.0
    assert c[-1] == pytest.approx(g.integrate(f), abs=1e-14)


def test_sample():
    g = Grid(256)
    f = g.y**2
    assert g.sample(f, g.y[17]) == f[17]
    mid = 0.5 + g.h / 2
    j = int(round((0.5 + 1) / g.h))
    assert g.sample(f, mid) == pytest.approx(0.5 * (f[j] + f[j + 1]), abs=1e-15)
    assert g.sample(g.y, 0.5 * (g.y[3] + g.y[4])) == pytest.approx(0.5 * (g.y[3] + g.y[4]), abs=1e-15)
    assert g.sample(f, 1.0) == 1.0
    with pytest.raises(DomainError):
        g.sample(f, 1.0001)
