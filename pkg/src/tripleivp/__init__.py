"""Triple integrals with variable limits as a third-order initial value problem.

``W(x_end)`` is obtained by differentiating under the integral sign to get
``W'''``, marching ``(W, W', W'')`` with explicit Euler, and lifting the
first-order result with Richardson extrapolation over halved step sizes.
A nested adaptive Simpson quadrature serves as an independent check.
"""
__version__ = "0.1.0"

from .control import ErrorEstimate, ToleranceReport, estimate_a4_bar, select_stepsize, solve_with_tolerance
from .expr import Bindings, differentiate, evaluate, free_vars, parse, simplify, to_text
from .ivp import IvpState, RTable, Trajectory, euler_solve, run_halved
from .kernels import BACKEND
from .leibniz import InitialConditions, LeibnizEvaluator
from .problem import DerivativeBundle, TripleIntegralProblem, derivatives, example_problem, validate
from .quad import QuadConfig, integrate1d, integrate2d, integrate3d_oracle
from .richardson import ExtrapolationResult, coefficients, convergence_table, extrapolate

__all__ = [
    "BACKEND", "Bindings", "DerivativeBundle", "ErrorEstimate", "ExtrapolationResult", "InitialConditions",
    "IvpState", "LeibnizEvaluator", "QuadConfig", "RTable", "ToleranceReport", "Trajectory",
    "TripleIntegralProblem", "coefficients", "convergence_table", "derivatives", "differentiate",
    "estimate_a4_bar", "euler_solve", "evaluate", "example_problem", "extrapolate", "free_vars",
    "integrate1d", "integrate2d", "integrate3d_oracle", "parse", "run_halved", "select_stepsize",
    "simplify", "solve_with_tolerance", "to_text", "validate",
]
