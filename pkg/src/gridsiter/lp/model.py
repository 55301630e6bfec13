"""Linear and mixed-integer program containers plus the solver seam."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration-limit"
NODE_LIMIT = "node-limit"

LESS = "<"
EQUAL = "="
GREATER = ">"

_SENSES = (LESS, EQUAL, GREATER)


@dataclass
class SolverOptions:
    """Tolerances and limits shared by the LP and MILP solvers."""

    feas_tol: float = 1e-7          # relative primal feasibility
    dual_tol: float = 1e-9          # reduced-cost tolerance (scaled by cost magnitude)
    integrality_tol: float = 1e-6
    gap_tol: float = 1e-6           # absolute MILP optimality gap
    iteration_limit: int | None = None
    node_limit: int = 200_000
    refactor_every: int = 150
    bland_after: int = 40           # consecutive degenerate pivots before Bland's rule


@dataclass
class LinearProgram:
    """min c'x  s.t.  A x {<,=,>} rhs,  lb <= x <= ub.

    Rows may carry a tag so shadow prices can be retrieved by name.
    """

    c: np.ndarray
    A: np.ndarray
    senses: list[str]
    rhs: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    row_tags: list[str | None] = field(default_factory=list)
    var_names: list[str] | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.rhs = np.asarray(self.rhs, dtype=float)
        self.lb = np.asarray(self.lb, dtype=float)
        self.ub = np.asarray(self.ub, dtype=float)
        m, n = self.A.shape
        if self.c.shape != (n,):
            raise ValueError(f"objective has {self.c.shape} entries, expected {n}")
        if self.rhs.shape != (m,) or len(self.senses) != m:
            raise ValueError("rhs/senses length does not match constraint count")
        if self.lb.shape != (n,) or self.ub.shape != (n,):
            raise ValueError("bound vectors do not match variable count")
        if not np.all(np.isfinite(self.c)):
            raise ValueError("objective coefficients must be finite")
        if not np.all(np.isfinite(self.A)):
            raise ValueError("constraint coefficients must be finite")
        if not np.all(np.isfinite(self.rhs)):
            raise ValueError("rhs must be finite")
        if np.any(self.lb > self.ub):
            bad = int(np.argmax(self.lb > self.ub))
            raise ValueError(f"variable {bad}: lower bound exceeds upper bound")
        for s in self.senses:
            if s not in _SENSES:
                raise ValueError(f"unknown constraint sense {s!r}")
        if not self.row_tags:
            self.row_tags = [None] * m

    @property
    def n_vars(self) -> int:
        return self.A.shape[1]

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    def with_bounds(self, lb: np.ndarray, ub: np.ndarray) -> "LinearProgram":
        """Copy sharing A/c/rhs but with replaced variable bounds."""
        return replace(self, lb=np.asarray(lb, float), ub=np.asarray(ub, float))


@dataclass
class MixedIntegerProgram:
    """A LinearProgram plus a set of variable indices restricted to {0,1}."""

    lp: LinearProgram
    binaries: tuple[int, ...]

    def __post_init__(self):
        self.binaries = tuple(sorted(set(int(b) for b in self.binaries)))
        n = self.lp.n_vars
        for b in self.binaries:
            if not 0 <= b < n:
                raise ValueError(f"binary index {b} outside variable range")


@dataclass
class Solution:
    """Solver result; primal/dual content is populated only when optimal."""

    status: str
    x: np.ndarray | None = None
    objective: float | None = None
    row_duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    iterations: int = 0
    best_bound: float | None = None
    nodes: int = 0
    duals: dict[str, float] = field(default_factory=dict)

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL


class LpBuilder:
    """Incremental construction of a LinearProgram (dense)."""

    def __init__(self):
        self._cost: list[float] = []
        self._lb: list[float] = []
        self._ub: list[float] = []
        self._names: list[str] = []
        self._rows: list[dict[int, float]] = []
        self._senses: list[str] = []
        self._rhs: list[float] = []
        self._tags: list[str | None] = []

    def add_var(self, lb: float = 0.0, ub: float = np.inf, cost: float = 0.0,
                name: str = "") -> int:
        idx = len(self._cost)
        self._cost.append(float(cost))
        self._lb.append(float(lb))
        self._ub.append(float(ub))
        self._names.append(name or f"x{idx}")
        return idx

    def add_constr(self, coeffs: dict[int, float], sense: str, rhs: float,
                   tag: str | None = None) -> int:
        if sense not in _SENSES:
            raise ValueError(f"unknown constraint sense {sense!r}")
        row = len(self._rows)
        self._rows.append({int(k): float(v) for k, v in coeffs.items()})
        self._senses.append(sense)
        self._rhs.append(float(rhs))
        self._tags.append(tag)
        return row

    @property
    def n_vars(self) -> int:
        return len(self._cost)

    def build(self) -> LinearProgram:
        n = len(self._cost)
        m = len(self._rows)
        A = np.zeros((m, n))
        for i, row in enumerate(self._rows):
            for j, v in row.items():
                A[i, j] = v
        return LinearProgram(
            c=np.array(self._cost), A=A, senses=list(self._senses),
            rhs=np.array(self._rhs), lb=np.array(self._lb), ub=np.array(self._ub),
            row_tags=list(self._tags), var_names=list(self._names),
        )
