from fractions import Fraction as F

import numpy as np
import pytest

from tripleivp import InitialConditions, coefficients, convergence_table, extrapolate, run_halved
from tripleivp import kernels
from tripleivp.errors import NonIntegerStepCount, OrderOutOfRange
from tripleivp.richardson import (
    aligned_levels, aligned_w, combine, fit_slope, format_fraction, halving_matrix, level_runs, solve_exact,
    step_count,
)

from conftest import EXACT_W5

PRINTED = {
    2: (F(-1), F(2)),
    3: (F(1, 3), F(-2), F(8, 3)),
    4: (F(-1, 21), F(2, 3), F(-8, 3), F(64, 21)),
    5: (F(1, 315), F(-2, 21), F(8, 9), F(-64, 21), F(1024, 315)),
    6: (F(-1, 9765), F(2, 315), F(-8, 63), F(64, 63), F(-1024, 315), F(32768, 9765)),
}

linear = InitialConditions(0.0, 1.0, 0.0)
zero = lambda x: 0.0  # noqa: E731


@pytest.mark.parametrize("s", sorted(PRINTED))
def test_printed_coefficients(s):
    assert coefficients(s) == PRINTED[s]


@pytest.mark.parametrize("s", range(2, 13))
def test_vandermonde_conditions(s):
    d = coefficients(s)
    assert all(isinstance(v, F) for v in d)
    assert sum(d) == 1
    for k in range(1, s):
        assert sum(dn * F(1, 2**n) ** k for n, dn in enumerate(d)) == 0


def test_largest_weight_order_six():
    assert max(abs(v) for v in coefficients(6)) == F(32768, 9765)


@pytest.mark.parametrize("s", [1, 13, 0, -2, 2.0, "4"])
def test_order_out_of_range(s):
    with pytest.raises(OrderOutOfRange):
        coefficients(s)


def test_solve_exact_small_system():
    a = [[F(2), F(1)], [F(1), F(3)]]
    assert solve_exact(a, [F(3), F(5)]) == [F(4, 5), F(7, 5)]
    with pytest.raises(ZeroDivisionError):
        solve_exact([[F(1), F(2)], [F(2), F(4)]], [F(1), F(2)])


def test_halving_matrix():
    assert halving_matrix(3) == [[1, 1, 1], [1, F(1, 2), F(1, 4)], [1, F(1, 4), F(1, 16)]]


def test_format_fraction():
    assert [format_fraction(v) for v in coefficients(4)] == ["-1/21", "2/3", "-8/3", "64/21"]
    assert format_fraction(F(-1)) == "-1"


def test_linear_exact_system():
    for s in (2, 4, 6):
        res = extrapolate(zero, linear, 0.0, 2.0, 8, s)
        np.testing.assert_allclose(res.m_s, res.euler, rtol=0, atol=1e-14)
        np.testing.assert_allclose(res.m_s, res.xs, rtol=0, atol=1e-14)


def test_example_m4_at_h_001(ev, ic):
    res = extrapolate(ev, ic, 1.0, 5.0, 400, 4)
    assert abs(res.final - EXACT_W5) <= 1e-4
    assert len(res.xs) == 401


def test_m2_is_two_k1_minus_k0(ev, ic):
    res = extrapolate(ev, ic, 1.0, 5.0, 50, 2)
    np.testing.assert_allclose(res.m_s, 2 * res.k_values[1] - res.k_values[0], rtol=1e-15, atol=1e-15)


def test_fused_levels_match_separate_runs(ev, ic):
    runs = level_runs(ev, ic, 1.0, 5.0, 20, 5)
    fused = aligned_levels(ev, ic, 1.0, 5.0, 20, 5)
    assert fused.tobytes() == aligned_w(runs).tobytes()
    direct = run_halved(ev, ic, 1.0, 5.0, 20, 3)
    assert fused[3].tobytes() == direct.w[::8].tobytes()


@pytest.mark.skipif("cython" not in kernels.available_backends(), reason="compiled kernels not built")
def test_fused_levels_backends_agree(ev, ic):
    a = aligned_levels(ev, ic, 1.0, 5.0, 30, 6, backend="cython")
    b = aligned_levels(ev, ic, 1.0, 5.0, 30, 6, backend="python")
    assert a.tobytes() == b.tobytes()


def test_combine_accumulates_in_level_order():
    k = np.array([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_array_equal(combine(k, coefficients(2)), [5.0, 6.0])


def test_step_count():
    assert step_count(0.01, 4.0) == 400
    assert step_count(0.04, 4.0) == 100
    for h in (0.03, 0.0, -0.1, 5.0):
        with pytest.raises(NonIntegerStepCount):
            step_count(h, 4.0)


def test_fit_slope():
    hs = [0.1, 0.05, 0.025]
    assert fit_slope(hs, [3 * h**2 for h in hs]) == pytest.approx(2.0)
    assert fit_slope(hs, [1e-20, 1e-20, 1e-3], floor=1e-16) is None


@pytest.fixture(scope="module")
def table(ev, ic):
    return convergence_table(ev, ic, 1.0, 5.0, [0.04, 0.02, 0.01, 0.005], orders=(2, 3, 4), reference=EXACT_W5)


def test_euler_error_decreases_monotonically(table):
    errs = [row.err_euler for row in table.rows]
    assert all(a > b for a, b in zip(errs, errs[1:]))


def test_convergence_slopes(table):
    assert 0.85 <= table.slopes["euler"] <= 1.15
    assert 1.75 <= table.slopes[2] <= 2.25
    assert 3.5 <= table.slopes[4] <= 4.5


def test_order_lift(table):
    for s in (2, 3, 4):
        assert table.slopes[s] >= s - 0.5


def test_single_row_table(ev, ic):
    t = convergence_table(ev, ic, 1.0, 5.0, [0.01], orders=(4,), reference=EXACT_W5)
    assert len(t.rows) == 1
    assert t.slopes == {}


def test_table_rejects_bad_step(ev, ic):
    with pytest.raises(NonIntegerStepCount):
        convergence_table(ev, ic, 1.0, 5.0, [0.03], reference=EXACT_W5)
