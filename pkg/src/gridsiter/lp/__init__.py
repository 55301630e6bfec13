"""LP/MILP solving with dual extraction.

The built-in bounded-variable simplex plus branch-and-bound is the default
engine; an alternative optimizer can be registered behind the same interface
(`register_solver`) without touching any caller.
"""

from __future__ import annotations

import itertools
from pathlib import Path

from .model import (
    EQUAL, GREATER, INFEASIBLE, ITERATION_LIMIT, LESS, NODE_LIMIT, OPTIMAL,
    UNBOUNDED, LinearProgram, LpBuilder, MixedIntegerProgram, Solution,
    SolverOptions,
)
from . import bnb, simplex
from .lpformat import dump_lp, write_lp_text

_dump_dir: Path | None = None
_dump_seq = itertools.count()


def set_dump_dir(path: str | None) -> None:
    """Enable/disable dumping every solved model as LP-format text."""
    global _dump_dir
    if path is None:
        _dump_dir = None
        return
    _dump_dir = Path(path)
    _dump_dir.mkdir(parents=True, exist_ok=True)


def _maybe_dump(problem) -> None:
    if _dump_dir is not None:
        dump_lp(_dump_dir / f"model_{next(_dump_seq):06d}.lp", problem)


class BuiltinSolver:
    """Default engine: revised simplex + best-bound branch and bound."""

    name = "builtin"

    def solve_lp(self, lp: LinearProgram,
                 options: SolverOptions | None = None) -> Solution:
        _maybe_dump(lp)
        return simplex.solve_lp(lp, options)

    def solve_milp(self, mip: MixedIntegerProgram,
                   options: SolverOptions | None = None) -> Solution:
        _maybe_dump(mip)
        return bnb.solve_milp(mip, options)


_SOLVERS: dict[str, type] = {"builtin": BuiltinSolver}


def register_solver(name: str, factory: type) -> None:
    _SOLVERS[name] = factory


def get_solver(name: str = "builtin"):
    try:
        return _SOLVERS[name]()
    except KeyError:
        raise KeyError(f"no solver registered under {name!r}") from None


def solve_lp(lp: LinearProgram, options: SolverOptions | None = None) -> Solution:
    return get_solver().solve_lp(lp, options)


def solve_milp(mip: MixedIntegerProgram,
               options: SolverOptions | None = None) -> Solution:
    return get_solver().solve_milp(mip, options)


__all__ = [
    "LinearProgram", "MixedIntegerProgram", "Solution", "SolverOptions",
    "LpBuilder", "BuiltinSolver", "register_solver", "get_solver",
    "solve_lp", "solve_milp", "dump_lp", "write_lp_text", "set_dump_dir",
    "OPTIMAL", "INFEASIBLE", "UNBOUNDED", "ITERATION_LIMIT", "NODE_LIMIT",
    "LESS", "EQUAL", "GREATER",
]
