import math

import numpy as np
import pytest

from tripleivp import InitialConditions, RTable, euler_solve, run_halved
from tripleivp import kernels
from tripleivp.errors import NonFiniteState
from tripleivp.ivp import node_grid, r_table
from tripleivp.richardson import fit_slope

from conftest import EXACT_W5

zero = lambda x: 0.0  # noqa: E731


def test_fixed_point():
    t = euler_solve(zero, InitialConditions(0, 0, 0), 0.0, 3.0, 7)
    assert not t.w.any() and not t.p.any() and not t.q.any()


def test_constant_slope_by_hand():
    t = euler_solve(zero, InitialConditions(0, 1, 0), 0.0, 1.0, 2)
    assert list(t.w) == [0.0, 0.5, 1.0]
    assert list(t.xs) == [0.0, 0.5, 1.0]


def test_one_step_of_example(ev, ic):
    t = euler_solve(ev, ic, 1.0, 1.01, 1)
    # hand values use 10-digit inputs, so allow rounding in the last place
    assert t.w[1] == pytest.approx(0.0090087640, abs=1e-9)
    assert t.p[1] == pytest.approx(0.8960618474, abs=1e-9)
    assert t.q[1] == pytest.approx(-0.5881429090, abs=1e-9)


def test_level_zero_is_plain_run(ev, ic):
    a = run_halved(ev, ic, 1.0, 5.0, 40, 0)
    b = euler_solve(ev, ic, 1.0, 5.0, 40)
    assert np.array_equal(a.w, b.w)


def test_level_one_linear_exact():
    ic = InitialConditions(0, 1, 0)
    a = run_halved(zero, ic, 0.0, 2.0, 8, 0)
    b = run_halved(zero, ic, 0.0, 2.0, 8, 1)
    np.testing.assert_allclose(b.w[::2], a.w, rtol=0, atol=1e-15)


def test_level_three_node_count(ev, ic):
    t = run_halved(ev, ic, 1.0, 5.0, 4, 3)
    assert t.n == 32
    assert len(t.xs) == 33
    assert t.h == 0.125
    assert t.xs[-1] == 5.0


def test_nodes_iterator():
    t = euler_solve(zero, InitialConditions(1, 2, 3), 0.0, 1.0, 4)
    nodes = list(t.nodes)
    assert len(nodes) == 5
    assert nodes[0][1].w == 1.0
    assert nodes[-1][0] == 1.0


def test_non_finite_state():
    with pytest.raises(NonFiniteState):
        euler_solve(lambda x: 1e308, InitialConditions(0, 0, 1e308), 0.0, 1.0, 4)


def test_r_table_from_callable_and_coarsen():
    t = r_table(math.sin, 0.0, 1.0, 8)
    assert t.n == 8
    c = r_table(t, 0.0, 1.0, 2)
    assert c.h == 0.5
    np.testing.assert_array_equal(c.values, t.values[::4])
    with pytest.raises(ValueError):
        r_table(t, 0.0, 1.0, 3)


def test_first_order_convergence(ev, ic):
    hs = [0.04, 0.02, 0.01, 0.005]
    errs = [abs(euler_solve(ev, ic, 1.0, 5.0, round(4 / h)).w[-1] - EXACT_W5) for h in hs]
    slope = fit_slope(hs, errs)
    assert 0.85 <= slope <= 1.15


def test_grid_nesting():
    x0, span, n = 1.0, 4.0, 25
    grids = [node_grid(x0, span / (n * 2**k), n * 2**k) for k in range(6)]
    for a in range(6):
        for b in range(a + 1, 6):
            assert np.array_equal(grids[b][:: 2 ** (b - a)], grids[a])


def test_determinism(ev, ic):
    a = euler_solve(ev, ic, 1.0, 5.0, 333)
    b = euler_solve(ev, ic, 1.0, 5.0, 333)
    for u, v in ((a.w, b.w), (a.p, b.p), (a.q, b.q)):
        assert u.tobytes() == v.tobytes()


@pytest.mark.parametrize("c, ic", [(2.5, InitialConditions(0.3, -1.0, 4.0)), (-0.75, InitialConditions(0, 0, 0))])
def test_constant_r_reproduces_q(c, ic):
    n, x0, x1 = 64, 0.0, 2.0
    t = euler_solve(lambda x: c, ic, x0, x1, n)
    exact_q = ic.q0 + c * (t.xs - x0)
    np.testing.assert_allclose(t.q, exact_q, rtol=0, atol=1e-13)


@pytest.mark.skipif("cython" not in kernels.available_backends(), reason="compiled kernels not built")
def test_backends_bitwise_equal(ev, ic):
    table = r_table(ev, 1.0, 5.0, 400)
    a = kernels.euler_march(table.values, table.h, ic.w0, ic.p0, ic.q0, 400, backend="cython")
    b = kernels.euler_march(table.values, table.h, ic.w0, ic.p0, ic.q0, 400, backend="python")
    for u, v in zip(a[:3], b[:3]):
        assert u.tobytes() == v.tobytes()


def test_rtable_rejects_bad_stride():
    t = RTable(0.0, 0.1, np.zeros(11))
    with pytest.raises(ValueError):
        t.coarsen(3)
