"""Bounded-variable revised simplex with sparse basis factorization.

Solves   min c'x  s.t.  A x {<=,=,>=} b,  l <= x <= u.

Each row gets a logical variable whose bounds encode the sense, giving an
all-equality system [A | I].  Rows whose logical cannot absorb the initial
residual receive a phase-1 artificial.  Pricing is Dantzig (most negative
reduced cost) and switches to Bland's rule after a run of degenerate steps.
The basis is held as a SuperLU factorization of the (very sparse) basis
matrix plus a product-form eta stack, refactorized every REFACTOR_EVERY
pivots.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

LE, EQ, GE = "<=", "==", ">="

AT_LB, AT_UB, BASIC, FREE_NB = 0, 1, 2, 3

REFACTOR_EVERY = 100
DEGENERACY_STREAK = 60
PIVOT_TOL = 1e-9


class SimplexError(Exception):
    pass


class SimplexStalled(SimplexError):
    """Raised when the iteration cap is hit even under Bland's rule."""


@dataclass
class SimplexResult:
    status: str  # optimal / infeasible / unbounded
    x: np.ndarray  # structural variables
    y: np.ndarray  # row duals (equality-form convention: c = A'y + z)
    z: np.ndarray  # structural reduced costs
    objective: float
    iterations: int


class _Basis:
    """LU factors of the current basis plus a product-form eta stack."""

    def __init__(self, A: sparse.csc_matrix, basis: np.ndarray):
        self.A = A
        self.refactor(basis)

    def refactor(self, basis: np.ndarray):
        B = self.A[:, basis].tocsc()
        self.lu = splu(B, permc_spec="COLAMD")
        self.etas: list[tuple[int, np.ndarray, float]] = []

    def ftran(self, col: np.ndarray) -> np.ndarray:
        x = self.lu.solve(col)
        for r, w, wr in self.etas:
            xr = x[r] / wr
            x -= xr * w
            x[r] = xr
        return x

    def btran(self, col: np.ndarray) -> np.ndarray:
        y = col.copy()
        for r, w, wr in reversed(self.etas):
            yr = (y[r] - w @ y) / wr  # w[r] is zeroed in push()
            y[r] = yr
        return self.lu.solve(y, trans="T")

    def push(self, r: int, w: np.ndarray):
        wr = w[r]
        w = w.copy()
        w[r] = 0.0
        self.etas.append((r, w, wr))

    @property
    def n_etas(self) -> int:
        return len(self.etas)


def solve_simplex(
    A: sparse.csc_matrix,
    senses: list[str],
    b: np.ndarray,
    c: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    feas_tol: float = 1e-7,
    opt_tol: float = 1e-9,
    max_iterations: int | None = None,
) -> SimplexResult:
    m, n = A.shape
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)

    # Logical columns: slack bounds encode the row sense.
    log_lb = np.zeros(m)
    log_ub = np.zeros(m)
    for i, s in enumerate(senses):
        if s == LE:
            log_lb[i], log_ub[i] = 0.0, np.inf
        elif s == GE:
            log_lb[i], log_ub[i] = -np.inf, 0.0
        elif s == EQ:
            log_lb[i], log_ub[i] = 0.0, 0.0
        else:
            raise ValueError(f"unknown row sense {s!r}")

    lb = np.concatenate([lower, log_lb])
    ub = np.concatenate([upper, log_ub])

    # Start structurals at the finite bound nearest zero; free variables at 0.
    x = np.zeros(n + m)
    status = np.full(n + m, AT_LB, dtype=np.int8)
    for j in range(n):
        if np.isfinite(lb[j]):
            x[j] = lb[j]
            status[j] = AT_LB
        elif np.isfinite(ub[j]):
            x[j] = ub[j]
            status[j] = AT_UB
        else:
            x[j] = 0.0
            status[j] = FREE_NB

    resid = b - A @ x[:n]

    # Logicals absorb the residual where their bounds allow; otherwise they
    # sit at the nearest bound and an artificial carries the gap.
    art_rows: list[int] = []
    art_signs: list[float] = []
    art_vals: list[float] = []
    basis = np.empty(m, dtype=np.int64)
    for i in range(m):
        j = n + i
        if log_lb[i] - feas_tol <= resid[i] <= log_ub[i] + feas_tol:
            x[j] = resid[i]
            status[j] = BASIC
            basis[i] = j
        else:
            pin = log_lb[i] if resid[i] < log_lb[i] else log_ub[i]
            x[j] = pin
            status[j] = AT_LB if pin == log_lb[i] else AT_UB
            gap = resid[i] - pin
            art_rows.append(i)
            art_signs.append(1.0 if gap > 0 else -1.0)
            art_vals.append(abs(gap))

    n_art = len(art_rows)
    n_total = n + m + n_art

    Aext = sparse.hstack(
        [A, sparse.eye(m, format="csc")]
        + (
            [sparse.csc_matrix((art_signs, (art_rows, range(n_art))), shape=(m, n_art))]
            if n_art
            else []
        ),
        format="csc",
    )
    Aext.sort_indices()

    lb = np.concatenate([lb, np.zeros(n_art)])
    ub = np.concatenate([ub, np.full(n_art, np.inf)])
    x = np.concatenate([x, np.asarray(art_vals)])
    status = np.concatenate([status, np.full(n_art, BASIC, dtype=np.int8)])
    for k, i in enumerate(art_rows):
        basis[i] = n + m + k

    if max_iterations is None:
        max_iterations = 200 * (m + n) + 20000

    phase1_cost = np.zeros(n_total)
    phase1_cost[n + m :] = 1.0
    real_cost = np.concatenate([c, np.zeros(m + n_art)])

    engine = _Engine(Aext, lb, ub, x, status, basis, feas_tol, opt_tol, max_iterations)

    if n_art:
        engine.run(phase1_cost, phase=1)
        infeas = x[n + m :].sum()
        if infeas > feas_tol * (1.0 + abs(b).max(initial=0.0)):
            return SimplexResult("infeasible", x[:n].copy(), np.zeros(m), np.zeros(n), np.nan, engine.iterations)
        # Lock artificials at zero for phase 2.
        engine.ub[n + m :] = 0.0
        engine.lb[n + m :] = 0.0
        engine.x[n + m :] = np.maximum(engine.x[n + m :], 0.0)

    unbounded = engine.run(real_cost, phase=2)
    if unbounded:
        return SimplexResult("unbounded", x[:n].copy(), np.zeros(m), np.zeros(n), np.nan, engine.iterations)

    # Fresh factorization for the final solves keeps residuals at LU accuracy.
    engine.basis_obj.refactor(engine.basis)
    xb = engine.recompute_basics(b)
    y, z = engine.duals(real_cost)
    xs = engine.x[:n].copy()
    obj = float(real_cost[:n] @ xs)
    return SimplexResult("optimal", xs, y, z[:n].copy(), obj, engine.iterations)


class _Engine:
    def __init__(self, A, lb, ub, x, status, basis, feas_tol, opt_tol, max_iterations):
        self.A = A
        self.m = A.shape[0]
        self.n_total = A.shape[1]
        self.lb = lb
        self.ub = ub
        self.x = x
        self.status = status
        self.basis = basis
        self.feas_tol = feas_tol
        self.opt_tol = opt_tol
        self.max_iterations = max_iterations
        self.iterations = 0
        self.basis_obj = _Basis(A, basis)

    def recompute_basics(self, b):
        nonbasic_mask = self.status != BASIC
        xn = np.where(nonbasic_mask, self.x, 0.0)
        rhs = b - self.A @ xn
        xb = self.basis_obj.ftran(rhs)
        self.x[self.basis] = xb
        return xb

    def duals(self, cost):
        cb = cost[self.basis]
        y = self.basis_obj.btran(cb)
        z = cost - self.A.T @ y
        return y, z

    def run(self, cost, phase: int) -> bool:
        """Iterate to optimality for the given cost vector.

        Returns True if the problem is unbounded (phase 2 only).
        """
        bland = False
        degenerate_streak = 0
        m = self.m

        while True:
            if self.iterations >= self.max_iterations:
                raise SimplexStalled(
                    f"simplex exceeded {self.max_iterations} iterations (phase {phase})"
                )
            self.iterations += 1

            if self.basis_obj.n_etas >= REFACTOR_EVERY:
                self.basis_obj.refactor(self.basis)

            cb = cost[self.basis]
            y = self.basis_obj.btran(cb)
            z = cost - self.A.T @ y

            # Entering variable: a nonbasic whose reduced cost pays off.
            tol = self.opt_tol * (1.0 + np.abs(cost).max(initial=0.0))
            score = np.zeros(self.n_total)
            at_lb = self.status == AT_LB
            at_ub = self.status == AT_UB
            free = self.status == FREE_NB
            score[at_lb] = np.minimum(z[at_lb], 0.0)  # want z < 0 to increase
            score[at_ub] = -np.maximum(z[at_ub], 0.0)  # want z > 0 to decrease
            score[free] = -np.abs(z[free])
            eligible = score < -tol
            if not eligible.any():
                return False

            if bland:
                q = int(np.flatnonzero(eligible)[0])
            else:
                q = int(np.argmin(score))

            direction = 1.0 if (z[q] < 0) else -1.0
            col = np.asarray(self.A[:, q].todense()).ravel()
            w = self.basis_obj.ftran(col)

            # Ratio test: basics hit a bound, or the entering variable flips.
            xb = self.x[self.basis]
            lbb = self.lb[self.basis]
            ubb = self.ub[self.basis]
            delta = direction * w
            step = np.inf
            leave_pos = -1
            leave_to = AT_LB

            dec = delta > PIVOT_TOL  # basic decreases toward its lower bound
            inc = delta < -PIVOT_TOL  # basic increases toward its upper bound
            if dec.any():
                steps = (xb[dec] - lbb[dec]) / delta[dec]
                k = int(np.argmin(steps))
                if steps[k] < step - 1e-13:
                    step = max(steps[k], 0.0)
                    leave_pos = int(np.flatnonzero(dec)[k])
                    leave_to = AT_LB
                elif bland and np.isfinite(step):
                    pass
            if inc.any():
                steps = (xb[inc] - ubb[inc]) / delta[inc]
                k = int(np.argmin(steps))
                if steps[k] < step - 1e-13:
                    step = max(steps[k], 0.0)
                    leave_pos = int(np.flatnonzero(inc)[k])
                    leave_to = AT_UB

            if bland and leave_pos >= 0:
                # Among ties, leave the smallest variable index (anti-cycling).
                ties_dec = dec & (np.abs((xb - lbb) - step * delta) <= 1e-10 * (1 + np.abs(xb)))
                ties_inc = inc & (np.abs((xb - ubb) - step * delta) <= 1e-10 * (1 + np.abs(xb)))
                tie_pos = np.flatnonzero(ties_dec | ties_inc)
                if tie_pos.size:
                    best = tie_pos[np.argmin(self.basis[tie_pos])]
                    leave_pos = int(best)
                    leave_to = AT_LB if ties_dec[leave_pos] else AT_UB

            bound_flip = self.ub[q] - self.lb[q]
            flip = np.isfinite(bound_flip) and bound_flip < step
            if flip:
                step = bound_flip

            if not np.isfinite(step):
                return phase == 2  # unbounded (cannot happen in phase 1)

            # Apply the step.
            if step > 0:
                self.x[self.basis] = xb - step * delta
                self.x[q] += direction * step

            if step <= self.feas_tol:
                degenerate_streak += 1
                if degenerate_streak >= DEGENERACY_STREAK:
                    bland = True
            else:
                degenerate_streak = 0
                bland = False

            if flip:
                self.status[q] = AT_UB if direction > 0 else AT_LB
                continue

            leaving = self.basis[leave_pos]
            self.status[leaving] = leave_to
            self.x[leaving] = self.lb[leaving] if leave_to == AT_LB else self.ub[leaving]
            self.status[q] = BASIC
            self.basis[leave_pos] = q

            if abs(w[leave_pos]) < PIVOT_TOL:
                self.basis_obj.refactor(self.basis)
            else:
                self.basis_obj.push(leave_pos, w)
