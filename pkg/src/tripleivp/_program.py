"""Flatten an expression tree into a postfix program for the compiled kernels.

A program is a pair of equal-length arrays ``(ops, args)``; ``args`` holds the
literal for ``CONST`` and the variable slot (0=x, 1=y, 2=z) for ``VAR``.  The
same program also carries a Python callable so the pure-Python kernels can run
without interpreting the opcodes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .expr import Constant, Expr, Unary, Variable, compile_scalar

CONST, VAR, NEG, SIN, COS, TAN, EXP, LOG, SQRT, ADD, SUB, MUL, DIV, POW = range(14)

_UNARY_CODE = {"neg": NEG, "sin": SIN, "cos": COS, "tan": TAN, "exp": EXP, "log": LOG, "sqrt": SQRT}
_BINARY_CODE = {"add": ADD, "sub": SUB, "mul": MUL, "div": DIV, "pow": POW}
_SLOT = {"x": 0, "y": 1, "z": 2}

# matches the fixed stack in _ckernels.pyx
MAX_STACK = 64


@dataclass(frozen=True)
class Program:
    expr: Expr
    ops: np.ndarray
    args: np.ndarray
    stack_size: int
    fn: Callable = field(repr=False, compare=False)


def _emit(e, ops, args):
    """Append the postfix code for ``e``; return the stack depth it needs."""
    if isinstance(e, Constant):
        ops.append(CONST)
        args.append(e.value)
        return 1
    if isinstance(e, Variable):
        ops.append(VAR)
        args.append(float(_SLOT[e.name]))
        return 1
    if isinstance(e, Unary):
        depth = _emit(e.child, ops, args)
        ops.append(_UNARY_CODE[e.op])
        args.append(0.0)
        return depth
    dl = _emit(e.left, ops, args)
    dr = _emit(e.right, ops, args)
    ops.append(_BINARY_CODE[e.op])
    args.append(0.0)
    return max(dl, dr + 1)


def compile_program(e: Expr) -> Program:
    ops, args = [], []
    depth = _emit(e, ops, args)
    return Program(
        expr=e,
        ops=np.asarray(ops, dtype=np.int32),
        args=np.asarray(args, dtype=np.float64),
        stack_size=depth,
        fn=compile_scalar(e),
    )
