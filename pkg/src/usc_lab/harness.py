"""Experiment harness: scenario solves, parameter sweeps, target calibration,
factor separation, and an independent dense-LP oracle for tiny instances.

Grid points run over immutable shared scenarios; USC_LAB_THREADS caps the
worker pool (default: sequential).
"""

from __future__ import annotations

import dataclasses
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import analysis
from .formulation import VarLayout, build_lp
from .lp import LpProblem, Solution, solve
from .model import PolicySpec, Scenario, Storage, variant_label
from .simplex import SimplexError

SWEEP_AXES = ("phi", "eta_rt", "storage_var_cost", "res_var_cost", "curtailment_cost")


def max_workers() -> int:
    raw = os.environ.get("USC_LAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass
class RunResult:
    """A solved scenario bundled with its LP, layout, and diagnostics."""

    scenario: Scenario
    problem: LpProblem
    layout: VarLayout
    solution: Solution
    cycling: Optional[analysis.CyclingReport] = None
    metrics: Optional[analysis.MetricsReport] = None

    @property
    def status(self) -> str:
        return self.solution.status


def solve_scenario(
    scenario: Scenario,
    backend: Optional[str] = None,
    feas_tol: float = 1e-7,
    opt_tol: float = 1e-8,
    analyze: bool = True,
) -> RunResult:
    """Build, solve, and (for optimal runs) analyze one scenario."""
    problem, layout = build_lp(scenario)
    solution = solve(problem, feas_tol=feas_tol, opt_tol=opt_tol, backend=backend)
    result = RunResult(scenario, problem, layout, solution)
    if analyze and solution.status == "optimal":
        result.cycling = analysis.detect_cycling(solution, layout, scenario.storages)
        result.metrics = analysis.compute_metrics(scenario, solution, layout, result.cycling)
    return result


# -- sweeps -------------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    """A one-axis sensitivity sweep run for several constraint variants."""

    base: Scenario
    axis: str
    grid: tuple[float, ...]
    variants: tuple[tuple[int, str], ...]

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(float(g) for g in self.grid))
        object.__setattr__(self, "variants", tuple((int(f), str(s)) for f, s in self.variants))
        if self.axis not in SWEEP_AXES:
            raise ValueError(f"unknown sweep axis {self.axis!r}; known: {SWEEP_AXES}")
        if not self.variants:
            raise ValueError("at least one (family, slcr) variant is required")
        if len(self.grid) < 1 or any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError("grid must be strictly increasing")


@dataclass
class SweepRow:
    axis: str
    value: float
    family: int
    slcr: str
    status: str
    objective: float = np.nan
    cycling_energy: float = np.nan
    cycling_hours: int = 0
    capacities: dict[str, float] = field(default_factory=dict)
    storage_capacities: dict[str, float] = field(default_factory=dict)
    emissions: float = np.nan
    indeterminate: bool = False

    @property
    def variant(self) -> str:
        return variant_label(self.family, self.slcr)


def derive_scenario(base: Scenario, axis: str, value: float, family: int, slcr: str) -> Scenario:
    """Clone the base scenario with one axis value and one policy variant applied."""
    phi = value if axis == "phi" else (base.policy.phi if base.policy.phi is not None else 0.8)
    policy = PolicySpec.renewable_share(family, slcr, phi)
    technologies = base.technologies
    storages = base.storages
    if axis == "eta_rt":
        eta = float(np.sqrt(value))
        storages = tuple(dataclasses.replace(r, eta_in=eta, eta_out=eta) for r in storages)
    elif axis == "storage_var_cost":
        storages = tuple(
            dataclasses.replace(r, var_charge_cost=value, var_discharge_cost=value)
            for r in storages
        )
    elif axis == "res_var_cost":
        technologies = tuple(
            dataclasses.replace(t, variable_cost=value) if t.kind == "renewable" else t
            for t in technologies
        )
    elif axis == "curtailment_cost":
        technologies = tuple(
            dataclasses.replace(t, curtailment_cost=value) if t.kind == "renewable" else t
            for t in technologies
        )
    return dataclasses.replace(base, technologies=technologies, storages=storages, policy=policy)


def _sweep_cell(spec: SweepSpec, value: float, family: int, slcr: str, backend) -> SweepRow:
    scenario = derive_scenario(spec.base, spec.axis, value, family, slcr)
    indeterminate = spec.axis == "storage_var_cost" and value == 0.0
    try:
        run = solve_scenario(scenario, backend=backend)
    except SimplexError as exc:
        return SweepRow(spec.axis, value, family, slcr, f"stalled: {exc}", indeterminate=indeterminate)
    if run.status != "optimal":
        return SweepRow(spec.axis, value, family, slcr, run.status, indeterminate=indeterminate)
    return SweepRow(
        axis=spec.axis,
        value=value,
        family=family,
        slcr=slcr,
        status="optimal",
        objective=run.solution.objective,
        cycling_energy=run.cycling.total_unintended_energy,
        cycling_hours=run.cycling.hours,
        capacities={t.name: run.layout.capacity(run.solution, t.name) for t in scenario.technologies},
        storage_capacities={
            f"{r.name}:{part}": run.layout.storage_capacity(run.solution, r.name, part)
            for r in scenario.storages
            for part in ("in", "out", "level")
        },
        emissions=run.metrics.emissions,
        indeterminate=indeterminate,
    )


def run_sweep(spec: SweepSpec, backend: Optional[str] = None) -> list[SweepRow]:
    """One row per (grid value, variant), in deterministic grid-major order."""
    cells = [
        (i, j, value, family, slcr)
        for i, value in enumerate(spec.grid)
        for j, (family, slcr) in enumerate(spec.variants)
    ]
    workers = max_workers()
    if workers == 1:
        results = {(i, j): _sweep_cell(spec, v, f, s, backend) for i, j, v, f, s in cells}
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {
                (i, j): pool.submit(_sweep_cell, spec, v, f, s, backend)
                for i, j, v, f, s in cells
            }
            results = {key: fut.result() for key, fut in futures.items()}
    return [results[(i, j)] for i, j, *_ in cells]


# -- calibration and factor separation ---------------------------------------


@dataclass
class CalibrationResult:
    phi: float
    reported: float
    converged: bool
    trace: list[tuple[float, float]]
    message: str = ""


def calibrate_equivalent_target(
    base: Scenario,
    target_share: float,
    report_as: tuple[int, str],
    tol: float = 1e-3,
    max_iterations: int = 30,
    backend: Optional[str] = None,
) -> CalibrationResult:
    """Find the complete-SLCR phi whose solution reports ``target_share``
    under the (family, slcr) accounting convention given by ``report_as``.

    Bisection over phi in [max(0, target-0.1), target]; the reported share of
    a complete-SLCR run is never below its own phi, so the target is an upper
    bracket by construction.
    """
    pol = base.policy
    if pol.kind != "renewable_share" or pol.slcr != "complete":
        raise ValueError("calibration requires a complete-SLCR renewable_share base scenario")
    family, slcr = report_as
    trace: list[tuple[float, float]] = []

    def reported(phi: float) -> float:
        scenario = dataclasses.replace(base, policy=PolicySpec.renewable_share(pol.family, "complete", phi))
        run = solve_scenario(scenario, backend=backend, analyze=False)
        if run.status != "optimal":
            raise RuntimeError(f"calibration solve at phi={phi} is {run.status}")
        share = analysis.reported_share(run.solution, run.layout, scenario, family, slcr)
        trace.append((phi, share))
        return share

    lo = max(0.0, target_share - 0.1)
    hi = target_share
    f_lo = reported(lo)
    if abs(f_lo - target_share) <= tol:
        return CalibrationResult(lo, f_lo, True, trace)
    if f_lo > target_share:
        return CalibrationResult(
            lo, f_lo, False, trace,
            message="bracket failure: reported share at the lower bracket already exceeds the target",
        )
    f_hi = reported(hi)
    if abs(f_hi - target_share) <= tol:
        return CalibrationResult(hi, f_hi, True, trace)
    if f_hi < target_share:
        return CalibrationResult(
            hi, f_hi, False, trace,
            message="non-monotonic bracket: reported share at phi=target falls short of the target",
        )
    phi, share = hi, f_hi
    for _ in range(max_iterations):
        phi = 0.5 * (lo + hi)
        share = reported(phi)
        if abs(share - target_share) <= tol:
            return CalibrationResult(phi, share, True, trace)
        if share < target_share:
            lo = phi
        else:
            hi = phi
    return CalibrationResult(phi, share, False, trace, message="iteration cap reached")


@dataclass
class RunSummary:
    """Aggregates of one factor-separation column."""

    label: str
    phi: float
    slcr: str
    objective: float
    capacities: dict[str, float]
    storage_capacities: dict[str, float]
    generation: dict[str, float]
    curtailment: float
    storage_loss: float
    cycling_energy: float
    cycling_hours: int


def summarize_run(label: str, run: RunResult) -> RunSummary:
    s = run.scenario
    return RunSummary(
        label=label,
        phi=s.policy.phi,
        slcr=s.policy.slcr,
        objective=run.solution.objective,
        capacities={t.name: run.layout.capacity(run.solution, t.name) for t in s.technologies},
        storage_capacities={
            f"{r.name}:{part}": run.layout.storage_capacity(run.solution, r.name, part)
            for r in s.storages
            for part in ("in", "out", "level")
        },
        generation={t.name: float(run.layout.generation(run.solution, t.name).sum()) for t in s.technologies},
        curtailment=sum(
            float(run.layout.curtailment(run.solution, t.name).sum()) for t in s.renewables
        ),
        storage_loss=sum(
            float(run.layout.charge(run.solution, r.name).sum() - run.layout.discharge(run.solution, r.name).sum())
            for r in s.storages
        ),
        cycling_energy=run.cycling.total_unintended_energy,
        cycling_hours=run.cycling.hours,
    )


@dataclass
class FactorSeparation:
    """Five columns disentangling cycling effects from ambition effects.

    Columns: zero-SLCR at phi, complete-SLCR matched to the zero run's
    reported share, proportionate-SLCR at phi, complete-SLCR matched to the
    proportionate run's reported share, and complete-SLCR at phi.  Columns
    1 vs 2 (and 3 vs 4) isolate the cycling effect; 2 and 4 vs 5 isolate the
    ambition effect.
    """

    columns: list[RunSummary]
    calibrations: dict[str, CalibrationResult]


FACTOR_COLUMNS = (
    "zero@phi",
    "complete@zero-matched",
    "proportionate@phi",
    "complete@proportionate-matched",
    "complete@phi",
)


def factor_separation(
    base: Scenario, phi: float, backend: Optional[str] = None, tol: float = 1e-3
) -> FactorSeparation:
    pol = base.policy
    family = pol.family if pol.kind == "renewable_share" else 1

    def run_at(slcr: str, value: float, label: str) -> RunSummary:
        scenario = dataclasses.replace(base, policy=PolicySpec.renewable_share(family, slcr, value))
        run = solve_scenario(scenario, backend=backend)
        if run.status != "optimal":
            raise RuntimeError(f"factor separation run {label!r} is {run.status}")
        return summarize_run(label, run)

    complete_base = dataclasses.replace(
        base, policy=PolicySpec.renewable_share(family, "complete", phi)
    )
    calibrations = {
        "zero": calibrate_equivalent_target(complete_base, phi, (family, "zero"), tol=tol, backend=backend),
        "proportionate": calibrate_equivalent_target(
            complete_base, phi, (family, "proportionate"), tol=tol, backend=backend
        ),
    }
    columns = [
        run_at("zero", phi, FACTOR_COLUMNS[0]),
        run_at("complete", calibrations["zero"].phi, FACTOR_COLUMNS[1]),
        run_at("proportionate", phi, FACTOR_COLUMNS[2]),
        run_at("complete", calibrations["proportionate"].phi, FACTOR_COLUMNS[3]),
        run_at("complete", phi, FACTOR_COLUMNS[4]),
    ]
    return FactorSeparation(columns=columns, calibrations=calibrations)


# -- independent dense oracle --------------------------------------------------


class OracleError(RuntimeError):
    pass


def brute_force_oracle(tiny: Scenario) -> float:
    """Objective of a tiny scenario via a separately coded dense tableau LP.

    The constraint rows are rebuilt directly from the scenario equations and
    solved with a textbook two-phase tableau simplex under Bland's rule, so
    the result shares no code with the sparse solver or the LP builder.
    """
    if tiny.horizon > 12 or len(tiny.technologies) > 2 or len(tiny.storages) > 1:
        raise ValueError("oracle is restricted to T <= 12, <= 2 technologies, <= 1 storage")

    T = tiny.horizon
    cols: list[float] = []  # objective coefficients
    pos: dict[tuple, int] = {}

    def new_var(key, cost):
        pos[key] = len(cols)
        cols.append(cost)

    for t in tiny.technologies:
        new_var(("C", t.name), t.capacity_cost)
        for h in range(T):
            new_var(("G", t.name, h), t.variable_cost)
        if t.kind == "renewable":
            for h in range(T):
                new_var(("CU", t.name, h), t.curtailment_cost)
    for r in tiny.storages:
        new_var(("Ci", r.name), r.charge_cost)
        new_var(("Co", r.name), r.discharge_cost)
        new_var(("Cl", r.name), r.energy_cost)
        for h in range(T):
            new_var(("in", r.name, h), r.var_charge_cost)
        for h in range(T):
            new_var(("out", r.name, h), r.var_discharge_cost)
        for h in range(T):
            new_var(("lvl", r.name, h), 0.0)

    if tiny.policy.kind == "carbon_price":
        for t in tiny.technologies:
            for h in range(T):
                cols[pos[("G", t.name, h)]] += tiny.policy.price * t.emission_factor

    n = len(cols)
    rows: list[tuple[np.ndarray, str, float]] = []

    def row(sense, rhs):
        a = np.zeros(n)
        rows.append((a, sense, rhs))
        return a

    for h in range(T):
        a = row("=", float(tiny.demand[h]))
        for t in tiny.technologies:
            a[pos[("G", t.name, h)]] = 1.0
        for r in tiny.storages:
            a[pos[("out", r.name, h)]] = 1.0
            a[pos[("in", r.name, h)]] = -1.0

    for t in tiny.technologies:
        avail = t.availability_series(T)
        for h in range(T):
            if t.kind == "renewable":
                a = row("=", 0.0)
                a[pos[("C", t.name)]] = avail[h]
                a[pos[("G", t.name, h)]] = -1.0
                a[pos[("CU", t.name, h)]] = -1.0
            else:
                a = row("<=", 0.0)
                a[pos[("G", t.name, h)]] = 1.0
                a[pos[("C", t.name)]] = -avail[h]

    for r in tiny.storages:
        for key, cap in (("in", "Ci"), ("out", "Co"), ("lvl", "Cl")):
            for h in range(T):
                a = row("<=", 0.0)
                a[pos[(key, r.name, h)]] = 1.0
                a[pos[(cap, r.name)]] = -1.0
        for h in range(T):
            a = row("=", 0.0)
            a[pos[("lvl", r.name, h)]] += 1.0
            a[pos[("in", r.name, h)]] = -r.eta_in
            a[pos[("out", r.name, h)]] = 1.0 / r.eta_out
            if h > 0 or tiny.wrap_storage_level:
                a[pos[("lvl", r.name, (h - 1) % T)]] += -r.self_discharge

    pol = tiny.policy
    if pol.kind == "renewable_share":
        ren = [t.name for t in tiny.technologies if t.kind == "renewable"]
        con = [t.name for t in tiny.technologies if t.kind != "renewable"]
        D = float(np.sum(tiny.demand))
        phi = pol.phi
        # Theta/Omega right-hand sides written out per the share table, with
        # the loss term sum(in - out) moved onto the variable side.
        loss_weight = {
            (1, "zero"): 0.0, (1, "proportionate"): phi, (1, "complete"): 1.0,
            (2, "zero"): -phi, (2, "proportionate"): 0.0, (2, "complete"): 1.0 - phi,
            (3, "zero"): 1.0, (3, "proportionate"): 1.0 - phi, (3, "complete"): 0.0,
            (4, "zero"): phi, (4, "proportionate"): 0.0, (4, "complete"): -(1.0 - phi),
        }[(pol.family, pol.slcr)]
        if pol.family in (1, 2):
            a = row(">=", phi * D if pol.family == 1 else 0.0)
            for name in ren:
                for h in range(T):
                    a[pos[("G", name, h)]] += 1.0
            if pol.family == 2:
                for t in tiny.technologies:
                    for h in range(T):
                        a[pos[("G", t.name, h)]] += -phi
        else:
            a = row("<=", (1.0 - phi) * D if pol.family == 3 else 0.0)
            for name in con:
                for h in range(T):
                    a[pos[("G", name, h)]] += 1.0
            if pol.family == 4:
                for t in tiny.technologies:
                    for h in range(T):
                        a[pos[("G", t.name, h)]] += -(1.0 - phi)
        for r in tiny.storages:
            for h in range(T):
                a[pos[("in", r.name, h)]] += -loss_weight
                a[pos[("out", r.name, h)]] += loss_weight
    elif pol.kind == "potential_share":
        a = row(">=", pol.phi * float(np.sum(tiny.demand)))
        for t in tiny.technologies:
            if t.kind == "renewable":
                a[pos[("C", t.name)]] = float(np.sum(t.availability_series(T)))
    elif pol.kind == "capacity_target":
        for name, target in (pol.capacity_targets or {}).items():
            a = row(">=", float(target))
            a[pos[("C", name)]] = 1.0
    elif pol.kind == "carbon_cap":
        if np.isfinite(pol.cap):
            a = row("<=", float(pol.cap))
            for t in tiny.technologies:
                for h in range(T):
                    a[pos[("G", t.name, h)]] = t.emission_factor

    status, obj = _tableau_simplex(np.asarray(cols), rows)
    if status != "optimal":
        raise OracleError(f"oracle LP is {status}")
    return obj


def _tableau_simplex(c: np.ndarray, rows) -> tuple[str, float]:
    """Two-phase dense tableau simplex (Bland's rule) for min c'x, x >= 0."""
    m = len(rows)
    n = len(c)
    A = np.array([a for a, _, _ in rows], dtype=float).reshape(m, n)
    b = np.array([rhs for _, _, rhs in rows], dtype=float)
    senses = [s for _, s, _ in rows]

    flip = b < 0
    A[flip] *= -1.0
    b[flip] = -b[flip]
    senses = [{"<=": ">=", ">=": "<=", "=": "="}[s] if f else s for s, f in zip(senses, flip)]

    n_slack = sum(1 for s in senses if s != "=")
    n_art = sum(1 for s in senses if s != "<=")
    tab = np.zeros((m, n + n_slack + n_art))
    tab[:, :n] = A
    basis = np.full(m, -1, dtype=int)
    js, ja = n, n + n_slack
    art_cols = []
    for i, s in enumerate(senses):
        if s == "<=":
            tab[i, js] = 1.0
            basis[i] = js
            js += 1
        elif s == ">=":
            tab[i, js] = -1.0
            js += 1
            tab[i, ja] = 1.0
            basis[i] = ja
            art_cols.append(ja)
            ja += 1
        else:
            tab[i, ja] = 1.0
            basis[i] = ja
            art_cols.append(ja)
            ja += 1

    def pivot(tab, b, basis, pr, pc):
        piv = tab[pr, pc]
        tab[pr] /= piv
        b[pr] /= piv
        for i in range(len(tab)):
            if i != pr and tab[i, pc] != 0.0:
                factor = tab[i, pc]
                tab[i] -= factor * tab[pr]
                b[i] -= factor * b[pr]
        basis[pr] = pc

    def optimize(cost, tab, b, basis, allowed):
        for _ in range(200000):
            cb = cost[basis]
            z = cost - cb @ tab
            z[~allowed] = 0.0
            entering = np.flatnonzero(z < -1e-10)
            if entering.size == 0:
                return "optimal"
            pc = int(entering[0])  # Bland: lowest index
            col = tab[:, pc]
            candidates = np.flatnonzero(col > 1e-12)
            if candidates.size == 0:
                return "unbounded"
            ratios = b[candidates] / col[candidates]
            best = ratios.min()
            ties = candidates[np.abs(ratios - best) <= 1e-12 * (1.0 + abs(best))]
            pr = int(ties[np.argmin(basis[ties])])  # Bland on leaving, too
            pivot(tab, b, basis, pr, pc)
        raise OracleError("tableau simplex exceeded its iteration cap")

    total = n + n_slack + n_art
    allowed = np.ones(total, dtype=bool)
    if n_art:
        phase1 = np.zeros(total)
        phase1[n + n_slack :] = 1.0
        if optimize(phase1, tab, b, basis, allowed) != "optimal":
            raise OracleError("phase-1 tableau became unbounded")
        if phase1[basis] @ b > 1e-7 * (1.0 + abs(b).max()):
            return "infeasible", np.nan
        allowed[n + n_slack :] = False
        # Degenerate-basic artificials must leave the basis now: a later
        # pivot could otherwise push them positive again.  Rows where no
        # pivot exists are redundant and can keep their zero artificial.
        for i in range(m):
            if basis[i] >= n + n_slack:
                pivots = np.flatnonzero(np.abs(tab[i, : n + n_slack]) > 1e-9)
                if pivots.size:
                    pivot(tab, b, basis, i, int(pivots[0]))

    cost = np.concatenate([c, np.zeros(n_slack + n_art)])
    status = optimize(cost, tab, b, basis, allowed)
    if status != "optimal":
        return status, np.nan
    x = np.zeros(total)
    x[basis] = b
    return "optimal", float(cost @ x)
