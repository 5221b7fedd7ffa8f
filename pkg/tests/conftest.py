import math

import pytest

from tripleivp import LeibnizEvaluator, TripleIntegralProblem, example_problem

# closed form: -(3/4)cos 2x + cos x + (1/8)cos 4x between 1 and 5
def _antideriv(x):
    return -0.75 * math.cos(2 * x) + math.cos(x) + 0.125 * math.cos(4 * x)


EXACT_W5 = _antideriv(5.0) - _antideriv(1.0)


def w1_closed(x):
    return 1.5 * math.sin(2 * x) - math.sin(x) - 0.5 * math.sin(4 * x)


def w2_closed(x):
    return 3 * math.cos(2 * x) - math.cos(x) - 2 * math.cos(4 * x)


def r_closed(x):
    return 8 * math.sin(4 * x) - 6 * math.sin(2 * x) + math.sin(x)


@pytest.fixture(scope="session")
def example():
    return example_problem()


@pytest.fixture(scope="session")
def example_leibniz():
    # same problem without the closed-form R, so R comes from the Leibniz expansion
    p = example_problem()
    return TripleIntegralProblem(p.f, p.y0, p.y1, p.z0, p.z1, p.x0, p.x_end)


@pytest.fixture(scope="session")
def ev(example):
    return LeibnizEvaluator(example)


@pytest.fixture(scope="session")
def ic(ev):
    return ev.initial_conditions()
