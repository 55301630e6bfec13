"""Bounded-variable revised simplex (phase 1 / phase 2) with dual extraction.

Variables carry individual bounds handled implicitly (never as rows); every
row receives a slack whose bounds encode the sense, with artificials added
only for rows whose initial slack value is out of range.  Pivoting is Dantzig
with smallest-index tie breaking, falling back to Bland's rule after a run of
degenerate steps, so identical inputs replay identical pivot sequences.
Row duals are reported as objective sensitivities to the rhs
(dual_i = d(objective)/d(rhs_i)).
"""

from __future__ import annotations

import numpy as np

from .model import (
    EQUAL, GREATER, INFEASIBLE, ITERATION_LIMIT, LESS, OPTIMAL, UNBOUNDED,
    LinearProgram, Solution, SolverOptions,
)

_AT_LOWER = 0
_AT_UPPER = 1
_FREE = 2

_PIV_TOL = 1e-9
_DEGEN_TOL = 1e-11
_RATIO_TIE = 1e-10


class _Simplex:
    def __init__(self, lp: LinearProgram, options: SolverOptions):
        self.lp = lp
        self.opt = options
        m, n = lp.A.shape
        self.m = m
        self.n = n

        # column layout: structurals | one slack per row | artificials
        slack_lo = np.zeros(m)
        slack_hi = np.zeros(m)
        for i, s in enumerate(lp.senses):
            if s == LESS:
                slack_lo[i], slack_hi[i] = 0.0, np.inf
            elif s == GREATER:
                slack_lo[i], slack_hi[i] = -np.inf, 0.0
            else:
                slack_lo[i], slack_hi[i] = 0.0, 0.0

        self.lo = np.concatenate([lp.lb, slack_lo])
        self.hi = np.concatenate([lp.ub, slack_hi])
        self.Afull = np.hstack([lp.A, np.eye(m)])

        # start structurals at the finite bound nearest the origin side
        self.status = np.full(n + m, _AT_LOWER, dtype=np.int8)
        xval = np.zeros(n + m)
        for j in range(n):
            if np.isfinite(self.lo[j]):
                self.status[j] = _AT_LOWER
                xval[j] = self.lo[j]
            elif np.isfinite(self.hi[j]):
                self.status[j] = _AT_UPPER
                xval[j] = self.hi[j]
            else:
                self.status[j] = _FREE
                xval[j] = 0.0
        self.xval = xval

        s0 = lp.rhs - lp.A @ xval[:n]
        art_cols = []
        art_sign = []
        basis = np.empty(m, dtype=np.int64)
        binv_diag = np.ones(m)
        n_art = 0
        for i in range(m):
            if slack_lo[i] - 1e-12 <= s0[i] <= slack_hi[i] + 1e-12:
                self.xval[n + i] = min(max(s0[i], slack_lo[i]), slack_hi[i])
                basis[i] = n + i
            else:
                clamped = min(max(s0[i], slack_lo[i]), slack_hi[i])
                self.xval[n + i] = clamped
                self.status[n + i] = _AT_UPPER if clamped == slack_hi[i] else _AT_LOWER
                sigma = 1.0 if s0[i] > clamped else -1.0
                col = np.zeros(m)
                col[i] = sigma
                art_cols.append(col)
                art_sign.append(sigma)
                basis[i] = n + m + n_art
                binv_diag[i] = sigma
                n_art += 1

        self.n_art = n_art
        if n_art:
            self.Afull = np.hstack([self.Afull, np.column_stack(art_cols)])
            self.lo = np.concatenate([self.lo, np.zeros(n_art)])
            self.hi = np.concatenate([self.hi, np.full(n_art, np.inf)])
            self.status = np.concatenate(
                [self.status, np.full(n_art, _AT_LOWER, dtype=np.int8)])
            art_vals = np.array(
                [abs(s0[i] - self.xval[n + i]) for i in range(m) if basis[i] >= n + m])
            self.xval = np.concatenate([self.xval, art_vals])

        self.ncols = self.Afull.shape[1]
        self.basis = basis
        self.in_basis = np.zeros(self.ncols, dtype=bool)
        self.in_basis[basis] = True
        self.Binv = np.diag(binv_diag)
        self.fixed = self.lo == self.hi
        self.iterations = 0
        self.pivots_since_refactor = 0

    # ------------------------------------------------------------------

    def _refactor(self):
        B = self.Afull[:, self.basis]
        self.Binv = np.linalg.inv(B)
        self._recompute_basics()
        self.pivots_since_refactor = 0

    def _recompute_basics(self):
        xtmp = self.xval.copy()
        xtmp[self.basis] = 0.0
        resid = self.lp.rhs - self.Afull @ xtmp
        self.xval[self.basis] = self.Binv @ resid

    def _entering(self, d: np.ndarray, tol: float, bland: bool) -> tuple[int, int] | None:
        status = self.status
        score = np.where(status == _AT_LOWER, -d,
                         np.where(status == _AT_UPPER, d, np.abs(d)))
        score[self.in_basis] = -np.inf
        score[self.fixed] = -np.inf
        if bland:
            eligible = np.flatnonzero(score > tol)
            if eligible.size == 0:
                return None
            q = int(eligible[0])
        else:
            q = int(np.argmax(score))
            if score[q] <= tol:
                return None
        if status[q] == _AT_LOWER:
            tdir = 1
        elif status[q] == _AT_UPPER:
            tdir = -1
        else:
            tdir = 1 if d[q] < 0 else -1
        return q, tdir

    def _run_phase(self, cost: np.ndarray, allow_unbounded: bool,
                   iter_limit: int) -> str:
        tol = self.opt.dual_tol * max(1.0, float(np.abs(cost).max(initial=0.0)))
        degen_run = 0
        bland = False
        while True:
            if self.iterations >= iter_limit:
                return ITERATION_LIMIT
            y = cost[self.basis] @ self.Binv
            d = cost - y @ self.Afull
            pick = self._entering(d, tol, bland)
            if pick is None:
                return OPTIMAL
            q, tdir = pick
            self.iterations += 1

            alpha = self.Binv @ self.Afull[:, q]
            coef = tdir * alpha
            xB = self.xval[self.basis]
            loB = self.lo[self.basis]
            hiB = self.hi[self.basis]

            ratios = np.full(self.m, np.inf)
            dn = coef > _PIV_TOL
            up = coef < -_PIV_TOL
            ratios[dn] = np.maximum(xB[dn] - loB[dn], 0.0) / coef[dn]
            ratios[up] = np.maximum(hiB[up] - xB[up], 0.0) / (-coef[up])

            delta_flip = self.hi[q] - self.lo[q]  # inf when a bound is open
            min_ratio = float(ratios.min(initial=np.inf))
            delta = min(min_ratio, delta_flip)

            if not np.isfinite(delta):
                if allow_unbounded:
                    return UNBOUNDED
                raise RuntimeError("phase-1 ray: artificial objective unbounded below")

            if delta <= _DEGEN_TOL:
                degen_run += 1
                if degen_run > self.opt.bland_after:
                    bland = True
            else:
                degen_run = 0
                bland = False

            if delta_flip <= min_ratio:
                # bound flip: entering runs to its opposite bound, basis unchanged
                self.xval[self.basis] = xB - coef * delta_flip
                self.xval[q] = self.hi[q] if tdir > 0 else self.lo[q]
                self.status[q] = _AT_UPPER if tdir > 0 else _AT_LOWER
                continue

            tie = ratios <= min_ratio + _RATIO_TIE
            if bland:
                cand = np.flatnonzero(tie)
                r = int(cand[np.argmin(self.basis[cand])])
            else:
                stab = np.where(tie, np.abs(coef), -1.0)
                r = int(np.argmax(stab))

            leave = int(self.basis[r])
            self.xval[self.basis] = xB - coef * delta
            self.xval[q] = self.xval[q] + tdir * delta
            # leaving variable lands exactly on its blocking bound
            if coef[r] > 0:
                self.xval[leave] = self.lo[leave]
                self.status[leave] = _AT_LOWER
            else:
                self.xval[leave] = self.hi[leave]
                self.status[leave] = _AT_UPPER
            self.in_basis[leave] = False
            self.in_basis[q] = True
            self.basis[r] = q

            piv = alpha[r]
            self.Binv[r, :] /= piv
            mask = np.arange(self.m) != r
            self.Binv[mask, :] -= np.outer(alpha[mask], self.Binv[r, :])

            self.pivots_since_refactor += 1
            if self.pivots_since_refactor >= self.opt.refactor_every:
                self._refactor()

    # ------------------------------------------------------------------

    def solve(self) -> Solution:
        m, n = self.m, self.n
        iter_limit = self.opt.iteration_limit or max(2000, 40 * (m + self.ncols))

        if self.n_art:
            cost1 = np.zeros(self.ncols)
            cost1[n + m:] = 1.0
            status = self._run_phase(cost1, allow_unbounded=False,
                                     iter_limit=iter_limit)
            if status == ITERATION_LIMIT:
                return Solution(status=ITERATION_LIMIT, iterations=self.iterations)
            art_sum = float(self.xval[n + m:].sum())
            infeas_tol = self.opt.feas_tol * max(
                1.0, float(np.abs(self.lp.rhs).max(initial=0.0)))
            if art_sum > infeas_tol:
                return Solution(status=INFEASIBLE, iterations=self.iterations)
            # pin artificials to zero for phase 2
            self.hi[n + m:] = 0.0
            self.xval[n + m:] = 0.0
            self.fixed = self.lo == self.hi
            self._refactor()

        cost2 = np.zeros(self.ncols)
        cost2[:n] = self.lp.c
        status = self._run_phase(cost2, allow_unbounded=True, iter_limit=iter_limit)
        if status in (ITERATION_LIMIT, UNBOUNDED):
            return Solution(status=status, iterations=self.iterations)

        self._refactor()  # clean basics before reporting
        x = self.xval[:n].copy()
        x = np.minimum(np.maximum(x, self.lp.lb), self.lp.ub)
        y = cost2[self.basis] @ self.Binv
        d = self.lp.c - y @ self.Afull[:, :n]
        duals = {tag: float(y[i]) for i, tag in enumerate(self.lp.row_tags)
                 if tag is not None}
        return Solution(
            status=OPTIMAL,
            x=x,
            objective=float(self.lp.c @ x),
            row_duals=y.copy(),
            reduced_costs=d,
            iterations=self.iterations,
            duals=duals,
        )


def _solve_boundonly(lp: LinearProgram) -> Solution:
    """Degenerate case with no rows: each variable sits at its cheaper bound."""
    x = np.where(lp.c >= 0, lp.lb, lp.ub)
    x[(lp.c == 0) & ~np.isfinite(lp.lb)] = 0.0
    if not np.all(np.isfinite(x)):
        return Solution(status=UNBOUNDED)
    return Solution(status=OPTIMAL, x=x, objective=float(lp.c @ x),
                    row_duals=np.zeros(0), reduced_costs=lp.c.copy())


def solve_lp(lp: LinearProgram, options: SolverOptions | None = None) -> Solution:
    """Solve an LP; infeasible/unbounded are reported in Solution.status."""
    options = options or SolverOptions()
    if lp.n_rows == 0:
        return _solve_boundonly(lp)
    return _Simplex(lp, options).solve()
