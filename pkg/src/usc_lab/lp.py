"""Sparse LP container, solver backends, KKT verification, and MPS export.

Sign conventions (minimization): row duals satisfy c = A'y + z with z the
reduced costs, so duals of binding >=-rows are non-negative, duals of
<=-rows non-positive, and equality duals free.  The dual of a row equals
the objective change per unit increase of its right-hand side.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import sparse

from .simplex import EQ, GE, LE, SimplexResult, solve_simplex

SENSES = (LE, EQ, GE)

OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"


class LpStructureError(ValueError):
    """Raised when an LpProblem fails structural validation."""


class VarIndex:
    """Bidirectional map between semantic names and column/row ids."""

    def __init__(self):
        self.col_names: list[str] = []
        self.row_names: list[str] = []
        self._col_ids: dict[str, int] = {}
        self._row_ids: dict[str, int] = {}

    def add_col(self, name: str) -> int:
        if name in self._col_ids:
            raise LpStructureError(f"duplicate column name {name!r}")
        idx = len(self.col_names)
        self.col_names.append(name)
        self._col_ids[name] = idx
        return idx

    def add_row(self, name: str) -> int:
        if name in self._row_ids:
            raise LpStructureError(f"duplicate row name {name!r}")
        idx = len(self.row_names)
        self.row_names.append(name)
        self._row_ids[name] = idx
        return idx

    def col(self, name: str) -> int:
        return self._col_ids[name]

    def row(self, name: str) -> int:
        return self._row_ids[name]


class LpProblem:
    """A sparse minimization LP assembled incrementally.

    Columns default to bounds [0, +inf).  Rows are (coefficients, sense, rhs)
    with sense one of '<=', '==', '>='.  Call :meth:`matrix` after assembly;
    the problem is immutable once a solver has touched it.
    """

    def __init__(self, name: str = "lp"):
        self.name = name
        self.names = VarIndex()
        self.objective: list[float] = []
        self.lower: list[float] = []
        self.upper: list[float] = []
        self._rows: list[tuple[np.ndarray, np.ndarray]] = []
        self.senses: list[str] = []
        self.rhs: list[float] = []
        self._matrix: Optional[sparse.csc_matrix] = None

    # -- assembly ----------------------------------------------------------
    def add_col(self, name: str, cost: float = 0.0, lower: float = 0.0, upper: float = np.inf) -> int:
        if self._matrix is not None:
            raise LpStructureError("problem is frozen")
        if lower > upper:
            raise LpStructureError(f"column {name!r}: lower bound exceeds upper bound")
        idx = self.names.add_col(name)
        self.objective.append(float(cost))
        self.lower.append(float(lower))
        self.upper.append(float(upper))
        return idx

    def add_row(self, name: str, coefs: dict[int, float], sense: str, rhs: float) -> int:
        if self._matrix is not None:
            raise LpStructureError("problem is frozen")
        if sense not in SENSES:
            raise LpStructureError(f"row {name!r}: unknown sense {sense!r}")
        if not np.isfinite(rhs):
            raise LpStructureError(f"row {name!r}: right-hand side must be finite")
        n = self.n_vars
        cols = np.fromiter(coefs.keys(), dtype=np.int64, count=len(coefs))
        vals = np.fromiter(coefs.values(), dtype=float, count=len(coefs))
        if cols.size and (cols.min() < 0 or cols.max() >= n):
            raise LpStructureError(f"row {name!r}: coefficient references unknown column")
        idx = self.names.add_row(name)
        self._rows.append((cols, vals))
        self.senses.append(sense)
        self.rhs.append(float(rhs))
        return idx

    def add_objective(self, col: int, delta: float):
        """Add ``delta`` to one objective coefficient (e.g. a carbon price)."""
        if self._matrix is not None:
            raise LpStructureError("problem is frozen")
        self.objective[col] += delta

    # -- structure ----------------------------------------------------------
    @property
    def n_vars(self) -> int:
        return len(self.objective)

    @property
    def n_rows(self) -> int:
        return len(self.senses)

    def row_coefs(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        return self._rows[i]

    def matrix(self) -> sparse.csc_matrix:
        """Constraint matrix in CSC form; freezes the problem."""
        if self._matrix is None:
            m, n = self.n_rows, self.n_vars
            rows = np.concatenate([np.full(len(c), i) for i, (c, _) in enumerate(self._rows)]) if m else np.empty(0, dtype=np.int64)
            cols = np.concatenate([c for c, _ in self._rows]) if m else np.empty(0, dtype=np.int64)
            vals = np.concatenate([v for _, v in self._rows]) if m else np.empty(0)
            self._matrix = sparse.csc_matrix((vals, (rows, cols)), shape=(m, n))
        return self._matrix

    def validate(self):
        """Structural checks; raises LpStructureError on the first failure."""
        lo, up = np.asarray(self.lower), np.asarray(self.upper)
        if np.any(lo > up):
            raise LpStructureError("a column has lower bound above its upper bound")
        if not np.all(np.isfinite(self.rhs)):
            raise LpStructureError("right-hand sides must be finite")
        if not np.all(np.isfinite(self.objective)):
            raise LpStructureError("objective coefficients must be finite")

    def fingerprint(self) -> bytes:
        """Stable byte representation (used for determinism checks)."""
        buf = io.BytesIO()
        buf.write(np.asarray(self.objective).tobytes())
        buf.write(np.asarray(self.lower).tobytes())
        buf.write(np.asarray(self.upper).tobytes())
        buf.write("".join(self.senses).encode())
        buf.write(np.asarray(self.rhs).tobytes())
        a = self.matrix().tocoo()
        buf.write(a.row.tobytes())
        buf.write(a.col.tobytes())
        buf.write(a.data.tobytes())
        return buf.getvalue()


@dataclass
class Solution:
    """Primal/dual solution of an LpProblem."""

    status: str
    objective: float
    primal: np.ndarray
    dual: np.ndarray
    reduced_costs: np.ndarray
    iterations: int = 0
    backend: str = "embedded"

    def value(self, col: int) -> float:
        return float(self.primal[col])


# -- solver backends --------------------------------------------------------

DEFAULT_BACKEND = "embedded"


def _solve_embedded(p: LpProblem, feas_tol: float, opt_tol: float) -> Solution:
    A = p.matrix()
    m = p.n_rows
    if m == 0:
        return _solve_unconstrained(p)
    res: SimplexResult = solve_simplex(
        A,
        p.senses,
        np.asarray(p.rhs),
        np.asarray(p.objective),
        np.asarray(p.lower),
        np.asarray(p.upper),
        feas_tol=feas_tol,
        opt_tol=opt_tol,
    )
    return Solution(res.status, res.objective, res.x, res.y, res.z, res.iterations, "embedded")


def _solve_unconstrained(p: LpProblem) -> Solution:
    c = np.asarray(p.objective)
    lo, up = np.asarray(p.lower), np.asarray(p.upper)
    x = np.where(np.isfinite(lo), lo, np.where(np.isfinite(up), up, 0.0))
    x = np.where(c < 0, np.where(np.isfinite(up), up, np.inf), x)
    x = np.where(c > 0, np.where(np.isfinite(lo), lo, -np.inf), x)
    if np.any(~np.isfinite(x)):
        return Solution(UNBOUNDED, np.nan, np.zeros(p.n_vars), np.zeros(0), np.zeros(p.n_vars), 0, "embedded")
    return Solution(OPTIMAL, float(c @ x), x, np.zeros(0), c.copy(), 0, "embedded")


def _solve_scipy(p: LpProblem, feas_tol: float, opt_tol: float) -> Solution:
    from scipy.optimize import linprog

    A = p.matrix().tocsr()
    senses = np.asarray(p.senses)
    rhs = np.asarray(p.rhs)
    le_mask = senses == LE
    ge_mask = senses == GE
    eq_mask = senses == EQ

    A_ub = sparse.vstack([A[le_mask], -A[ge_mask]], format="csr") if (le_mask.any() or ge_mask.any()) else None
    b_ub = np.concatenate([rhs[le_mask], -rhs[ge_mask]]) if A_ub is not None else None
    A_eq = A[eq_mask] if eq_mask.any() else None
    b_eq = rhs[eq_mask] if A_eq is not None else None

    res = linprog(
        np.asarray(p.objective),
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=list(zip(p.lower, [u if np.isfinite(u) else None for u in p.upper])),
        method="highs",
        options={"primal_feasibility_tolerance": max(feas_tol, 1e-10),
                 "dual_feasibility_tolerance": max(opt_tol, 1e-10)},
    )
    if res.status == 2:
        return Solution(INFEASIBLE, np.nan, np.zeros(p.n_vars), np.zeros(p.n_rows), np.zeros(p.n_vars), 0, "scipy")
    if res.status == 3:
        return Solution(UNBOUNDED, np.nan, np.zeros(p.n_vars), np.zeros(p.n_rows), np.zeros(p.n_vars), 0, "scipy")
    if res.status != 0:
        raise RuntimeError(f"scipy backend failed: {res.message}")

    dual = np.zeros(p.n_rows)
    if A_ub is not None:
        ub_marg = res.ineqlin.marginals  # <= 0 in HiGHS convention for <=-rows
        n_le = int(le_mask.sum())
        dual[le_mask] = ub_marg[:n_le]
        dual[ge_mask] = -ub_marg[n_le:]
    if A_eq is not None:
        dual[eq_mask] = res.eqlin.marginals
    z = np.asarray(p.objective) - p.matrix().T @ dual
    return Solution(OPTIMAL, float(res.fun), res.x, dual, z, int(res.nit), "scipy")


BACKENDS = {"embedded": _solve_embedded, "scipy": _solve_scipy}


def solve(p: LpProblem, feas_tol: float = 1e-7, opt_tol: float = 1e-8, backend: Optional[str] = None) -> Solution:
    """Solve a minimization LP, returning primal values, row duals, and reduced costs."""
    p.validate()
    name = backend or DEFAULT_BACKEND
    try:
        fn = BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown backend {name!r}; known: {sorted(BACKENDS)}") from None
    return fn(p, feas_tol, opt_tol)


# -- KKT verification --------------------------------------------------------


@dataclass
class KktReport:
    """Max-norm residuals of the four optimality conditions plus the duality gap."""

    stationarity: float
    primal_feas: float
    dual_feas: float
    comp_slack: float
    duality_gap: float
    tol: float

    @property
    def passed(self) -> bool:
        return (
            max(self.stationarity, self.primal_feas, self.dual_feas, self.comp_slack)
            <= self.tol
        )

    def max_residual(self) -> float:
        return max(self.stationarity, self.primal_feas, self.dual_feas, self.comp_slack)


def check_kkt(p: LpProblem, sol: Solution, tol: float = 1e-6) -> KktReport:
    """Verify stationarity, primal/dual feasibility, and complementary slackness.

    Stationarity takes the stored reduced costs as the bound multipliers, so
    its residual is |c - A'y - z| per column.  Complementary slackness pairs
    row duals with row slacks and reduced costs with the distance of each
    variable from the bound its sign points at.

    Each violation is normalized by the magnitude of the quantities entering
    its condition (1 + |b_i|, 1 + |c_j|, 1 + |y_i|), so the residuals are
    scale-free and a single tolerance works for unit-size test problems and
    GW-scale scenarios alike.  Dual-feasibility sign violations are reported
    raw: a wrong-signed multiplier is wrong at any scale.
    """
    if sol.status != OPTIMAL:
        raise ValueError("KKT check requires an optimal solution")
    A = p.matrix()
    c = np.asarray(p.objective)
    x = sol.primal
    y = sol.dual
    z = sol.reduced_costs
    lo, up = np.asarray(p.lower), np.asarray(p.upper)

    aty = A.T @ y
    stationarity = float(np.max(np.abs(c - aty - z) / (1.0 + np.abs(c) + np.abs(aty)), initial=0.0))

    ax = A @ x if p.n_rows else np.zeros(0)
    rhs = np.asarray(p.rhs)
    senses = np.asarray(p.senses)
    slack = ax - rhs  # >=0 required for >=-rows, <=0 for <=-rows, ==0 for eq
    row_scale = 1.0 + np.abs(rhs)
    pf = 0.0
    if p.n_rows:
        rel = slack / row_scale
        pf = max(
            float(np.max(np.abs(rel[senses == EQ]), initial=0.0)),
            float(np.max(rel[senses == LE], initial=0.0)),
            float(np.max(-rel[senses == GE], initial=0.0)),
        )
    bound_scale_lo = 1.0 + np.abs(np.where(np.isfinite(lo), lo, 0.0))
    bound_scale_up = 1.0 + np.abs(np.where(np.isfinite(up), up, 0.0))
    pf = max(
        pf,
        float(np.max(np.where(np.isfinite(lo), lo - x, 0.0) / bound_scale_lo, initial=0.0)),
        float(np.max(np.where(np.isfinite(up), x - up, 0.0) / bound_scale_up, initial=0.0)),
    )

    df = 0.0
    if p.n_rows:
        df = max(
            float(np.max(y[senses == LE], initial=0.0)),  # <=-rows need y <= 0
            float(np.max(-y[senses == GE], initial=0.0)),  # >=-rows need y >= 0
        )
    # Reduced-cost signs: z >= 0 pushes x to its lower bound, z <= 0 to its upper.
    no_lower = ~np.isfinite(lo)
    no_upper = ~np.isfinite(up)
    df = max(df, float(np.max(np.minimum(z, 0.0)[no_upper] * -1, initial=0.0)))
    df = max(df, float(np.max(np.maximum(z, 0.0)[no_lower], initial=0.0)))

    cs = 0.0
    if p.n_rows:
        cs = float(
            np.max(np.abs(y * slack) / ((1.0 + np.abs(y)) * (1.0 + np.abs(slack))), initial=0.0)
        )
    gap_lo = np.where(np.isfinite(lo), x - lo, 0.0)
    gap_up = np.where(np.isfinite(up), up - x, 0.0)
    z_scale = 1.0 + np.abs(z)
    cs = max(cs, float(np.max(np.abs(np.maximum(z, 0.0) * gap_lo) / (z_scale * (1.0 + np.abs(gap_lo))), initial=0.0)))
    cs = max(cs, float(np.max(np.abs(np.minimum(z, 0.0) * gap_up) / (z_scale * (1.0 + np.abs(gap_up))), initial=0.0)))

    dual_obj = float(rhs @ y) if p.n_rows else 0.0
    dual_obj += float(np.sum(np.maximum(z, 0.0) * np.where(np.isfinite(lo), lo, 0.0)))
    dual_obj += float(np.sum(np.minimum(z, 0.0) * np.where(np.isfinite(up), up, 0.0)))
    gap = abs(sol.objective - dual_obj)

    return KktReport(stationarity, pf, df, cs, gap, tol)


# -- MPS export ---------------------------------------------------------------


def _mps_name(prefix: str, i: int) -> str:
    return f"{prefix}{i:07d}"


def _mps_num(v: float) -> str:
    s = f"{v:.10g}"
    return s if len(s) <= 12 else f"{v:.6E}"


def write_mps(p: LpProblem, free: bool = False) -> str:
    """Render the problem in classic MPS text (fixed field layout by default).

    Fixed format generates 8-character row/column names (R0000001, X0000001);
    free format keeps the semantic names.  Section order is NAME, ROWS,
    COLUMNS, RHS, BOUNDS, ENDATA with rows and columns in index order.
    """
    sense_tag = {LE: "L", EQ: "E", GE: "G"}
    if free:
        rname = [n.replace(" ", "_") for n in p.names.row_names]
        cname = [n.replace(" ", "_") for n in p.names.col_names]
    else:
        rname = [_mps_name("R", i) for i in range(p.n_rows)]
        cname = [_mps_name("X", j) for j in range(p.n_vars)]

    def fixed(f2: str, f3: str, f5: str = "", f6: str = "") -> str:
        line = f" {f2:<2} {f3:<8}"
        if f5:
            line = f"{line:<14}{f5:<10}{f6:>12}"
        return line.rstrip()

    out = [f"NAME          {p.name.upper()[:8]}"]
    out.append("ROWS")
    out.append(" N  COST")
    for i in range(p.n_rows):
        out.append(f" {sense_tag[p.senses[i]]}  {rname[i]}")

    out.append("COLUMNS")
    A = p.matrix().tocsc()
    for j in range(p.n_vars):
        entries: list[tuple[str, float]] = []
        if p.objective[j] != 0.0:
            entries.append(("COST", p.objective[j]))
        start, end = A.indptr[j], A.indptr[j + 1]
        order = np.argsort(A.indices[start:end], kind="stable")
        for k in order:
            entries.append((rname[A.indices[start + k]], A.data[start + k]))
        for a in range(0, len(entries), 2):
            pair = entries[a : a + 2]
            line = f"    {cname[j]:<10}{pair[0][0]:<10}{_mps_num(pair[0][1]):>12}"
            if len(pair) == 2:
                line += f"   {pair[1][0]:<10}{_mps_num(pair[1][1]):>12}"
            out.append(line)

    out.append("RHS")
    entries = [(rname[i], p.rhs[i]) for i in range(p.n_rows) if p.rhs[i] != 0.0]
    for a in range(0, len(entries), 2):
        pair = entries[a : a + 2]
        line = f"    RHS       {pair[0][0]:<10}{_mps_num(pair[0][1]):>12}"
        if len(pair) == 2:
            line += f"   {pair[1][0]:<10}{_mps_num(pair[1][1]):>12}"
        out.append(line)

    bound_lines = []
    for j in range(p.n_vars):
        lo, up = p.lower[j], p.upper[j]
        if lo == 0.0 and np.isinf(up):
            continue
        if lo == up:
            bound_lines.append(f" FX BND       {cname[j]:<10}{_mps_num(lo):>12}")
            continue
        if np.isneginf(lo):
            bound_lines.append(f" MI BND       {cname[j]:<10}")
        elif lo != 0.0:
            bound_lines.append(f" LO BND       {cname[j]:<10}{_mps_num(lo):>12}")
        if np.isfinite(up):
            bound_lines.append(f" UP BND       {cname[j]:<10}{_mps_num(up):>12}")
    if bound_lines:
        out.append("BOUNDS")
        out.extend(bound_lines)

    out.append("ENDATA")
    return "\n".join(out) + "\n"
