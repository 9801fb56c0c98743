"""Translate a Scenario into a sparse LP.

Hourly structure per scenario: an energy balance equality, an availability
equality with explicit curtailment for each renewable, capacity caps for
conventionals and for storage charge/discharge/level, and the storage level
recursion (wrapping first-to-last hour unless disabled).  Exactly one policy
row is appended per policy kind; the twelve renewable-share variants follow
the family/SLCR table with all variables moved to the left-hand side.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .lp import EQ, GE, LE, LpProblem
from .model import (
    RENEWABLE,
    PolicySpec,
    Scenario,
    Violation,
    validate_scenario,
    variant_label,
)


class InvalidScenarioError(ValueError):
    def __init__(self, violations: list[Violation]):
        super().__init__("; ".join(str(v) for v in violations))
        self.violations = violations


STO_PARTS = ("in", "out", "level")


@dataclass
class VarLayout:
    """Column/row ids of every semantic variable group in the LP."""

    horizon: int
    cap: dict[str, int] = field(default_factory=dict)
    gen: dict[str, np.ndarray] = field(default_factory=dict)
    cur: dict[str, np.ndarray] = field(default_factory=dict)
    sto_cap: dict[str, dict[str, int]] = field(default_factory=dict)
    sto_in: dict[str, np.ndarray] = field(default_factory=dict)
    sto_out: dict[str, np.ndarray] = field(default_factory=dict)
    sto_level: dict[str, np.ndarray] = field(default_factory=dict)
    balance_rows: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    avail_rows: dict[str, np.ndarray] = field(default_factory=dict)
    cap_rows: dict[str, np.ndarray] = field(default_factory=dict)
    sto_cap_rows: dict[str, dict[str, np.ndarray]] = field(default_factory=dict)
    level_rows: dict[str, np.ndarray] = field(default_factory=dict)
    policy_row: Optional[int] = None
    carbon_row: Optional[int] = None
    target_rows: dict[str, int] = field(default_factory=dict)

    # -- extraction helpers -------------------------------------------------
    def generation(self, sol, name: str) -> np.ndarray:
        return sol.primal[self.gen[name]]

    def curtailment(self, sol, name: str) -> np.ndarray:
        return sol.primal[self.cur[name]]

    def charge(self, sol, name: str) -> np.ndarray:
        return sol.primal[self.sto_in[name]]

    def discharge(self, sol, name: str) -> np.ndarray:
        return sol.primal[self.sto_out[name]]

    def level(self, sol, name: str) -> np.ndarray:
        return sol.primal[self.sto_level[name]]

    def capacity(self, sol, name: str) -> float:
        return float(sol.primal[self.cap[name]])

    def storage_capacity(self, sol, name: str, part: str) -> float:
        return float(sol.primal[self.sto_cap[name][part]])

    def prices(self, sol) -> np.ndarray:
        """Hourly electricity price: dual of the energy balance."""
        return sol.dual[self.balance_rows]


def build_lp(s: Scenario) -> tuple[LpProblem, VarLayout]:
    """Build the dispatch-and-investment LP for a validated scenario."""
    violations = validate_scenario(s)
    if violations:
        raise InvalidScenarioError(violations)

    T = s.horizon
    p = LpProblem(name="usc")
    layout = VarLayout(horizon=T)
    hours = np.arange(T)

    for t in s.technologies:
        layout.cap[t.name] = p.add_col(f"C[{t.name}]", cost=t.capacity_cost)
        layout.gen[t.name] = np.array(
            [p.add_col(f"G[{t.name}][t={h}]", cost=t.variable_cost) for h in hours]
        )
        if t.kind == RENEWABLE:
            layout.cur[t.name] = np.array(
                [p.add_col(f"CU[{t.name}][t={h}]", cost=t.curtailment_cost) for h in hours]
            )

    for r in s.storages:
        layout.sto_cap[r.name] = {
            "in": p.add_col(f"Cin[{r.name}]", cost=r.charge_cost),
            "out": p.add_col(f"Cout[{r.name}]", cost=r.discharge_cost),
            "level": p.add_col(f"Cl[{r.name}]", cost=r.energy_cost),
        }
        layout.sto_in[r.name] = np.array(
            [p.add_col(f"Gin[{r.name}][t={h}]", cost=r.var_charge_cost) for h in hours]
        )
        layout.sto_out[r.name] = np.array(
            [p.add_col(f"Gout[{r.name}][t={h}]", cost=r.var_discharge_cost) for h in hours]
        )
        layout.sto_level[r.name] = np.array(
            [p.add_col(f"Gl[{r.name}][t={h}]", cost=0.0) for h in hours]
        )

    # Energy balance: sum_s G + sum_r (out - in) = d_t.
    balance = []
    for h in hours:
        coefs = {int(layout.gen[t.name][h]): 1.0 for t in s.technologies}
        for r in s.storages:
            coefs[int(layout.sto_out[r.name][h])] = 1.0
            coefs[int(layout.sto_in[r.name][h])] = -1.0
        balance.append(p.add_row(f"balance[t={h}]", coefs, EQ, float(s.demand[h])))
    layout.balance_rows = np.asarray(balance)

    # Renewable availability (equality, explicit curtailment) and
    # conventional capacity limits.
    for t in s.technologies:
        avail = t.availability_series(T)
        if t.kind == RENEWABLE:
            rows = [
                p.add_row(
                    f"avail[{t.name}][t={h}]",
                    {
                        layout.cap[t.name]: float(avail[h]),
                        int(layout.gen[t.name][h]): -1.0,
                        int(layout.cur[t.name][h]): -1.0,
                    },
                    EQ,
                    0.0,
                )
                for h in hours
            ]
            layout.avail_rows[t.name] = np.asarray(rows)
        else:
            rows = [
                p.add_row(
                    f"cap[{t.name}][t={h}]",
                    {layout.cap[t.name]: float(avail[h]), int(layout.gen[t.name][h]): -1.0},
                    GE,
                    0.0,
                )
                for h in hours
            ]
            layout.cap_rows[t.name] = np.asarray(rows)

    # Storage caps and the level recursion.
    for r in s.storages:
        layout.sto_cap_rows[r.name] = {}
        for part, cols in (("in", layout.sto_in), ("out", layout.sto_out), ("level", layout.sto_level)):
            rows = [
                p.add_row(
                    f"cap_{part}[{r.name}][t={h}]",
                    {layout.sto_cap[r.name][part]: 1.0, int(cols[r.name][h]): -1.0},
                    GE,
                    0.0,
                )
                for h in hours
            ]
            layout.sto_cap_rows[r.name][part] = np.asarray(rows)

        rows = []
        for h in hours:
            coefs = {
                int(layout.sto_level[r.name][h]): 1.0,
                int(layout.sto_in[r.name][h]): -r.eta_in,
                int(layout.sto_out[r.name][h]): 1.0 / r.eta_out,
            }
            prev = (h - 1) % T
            if h > 0 or s.wrap_storage_level:
                prev_col = int(layout.sto_level[r.name][prev])
                coefs[prev_col] = coefs.get(prev_col, 0.0) - r.self_discharge
            rows.append(p.add_row(f"level[{r.name}][t={h}]", coefs, EQ, 0.0))
        layout.level_rows[r.name] = np.asarray(rows)

    _apply_policy(p, s, layout)
    return p, layout


def _apply_policy(p: LpProblem, s: Scenario, layout: VarLayout):
    pol = s.policy
    if pol.kind == "none":
        return
    if pol.kind == "renewable_share":
        coefs, sense, rhs = policy_row(pol.family, pol.slcr, pol.phi, layout, s)
        layout.policy_row = p.add_row(f"policy[{variant_label(pol.family, pol.slcr)}]", coefs, sense, rhs)
    elif pol.kind == "potential_share":
        coefs, sense, rhs = potential_share_row(pol.phi, layout, s)
        layout.policy_row = p.add_row("policy[potential]", coefs, sense, rhs)
    elif pol.kind == "capacity_target":
        for name, row in capacity_target_rows(pol.capacity_targets, layout, s):
            layout.target_rows[name] = p.add_row(f"target[{name}]", row[0], row[1], row[2])
    elif pol.kind == "carbon_cap":
        if np.isfinite(pol.cap):
            coefs = {}
            for t in s.technologies:
                if t.emission_factor > 0:
                    for col in layout.gen[t.name]:
                        coefs[int(col)] = t.emission_factor
            layout.carbon_row = p.add_row("carbon_cap", coefs, LE, float(pol.cap))
    elif pol.kind == "carbon_price":
        for t in s.technologies:
            if t.emission_factor > 0 and pol.price:
                for col in layout.gen[t.name]:
                    p.add_objective(int(col), pol.price * t.emission_factor)
    else:  # pragma: no cover - guarded by validation
        raise InvalidScenarioError([Violation("unknown_policy", pol.kind)])


def _add_group(coefs: dict[int, float], cols, value: float):
    if value == 0.0:
        return
    for c in cols:
        coefs[int(c)] = coefs.get(int(c), 0.0) + value


def policy_row(
    family: int, slcr: str, phi: float, layout: VarLayout, s: Scenario
) -> tuple[dict[int, float], str, float]:
    """One renewable-share constraint row, normalized variables-left.

    Families 1/2 are emitted as >=-rows (minimum renewable), families 3/4 as
    <=-rows (maximum conventional), matching the native orientation of the
    target table so duals stay comparable across runs.  Loss terms enter with
    the SLCR-level weight on (Gin - Gout).
    """
    if not (0.0 <= phi <= 1.0):
        raise ValueError("phi must lie in [0, 1]")
    ren = [t.name for t in s.renewables]
    con = [t.name for t in s.conventionals]
    total_demand = float(np.sum(s.demand))

    coefs: dict[int, float] = {}
    if family in (1, 2):
        sense = GE
        for name in ren:
            _add_group(coefs, layout.gen[name], 1.0)
        if family == 1:
            rhs = phi * total_demand
            loss_w = {"zero": 0.0, "proportionate": phi, "complete": 1.0}[slcr]
        else:
            rhs = 0.0
            for name in ren + con:
                _add_group(coefs, layout.gen[name], -phi)
            loss_w = {"zero": -phi, "proportionate": 0.0, "complete": 1.0 - phi}[slcr]
        for rname in layout.sto_in:
            _add_group(coefs, layout.sto_in[rname], -loss_w)
            _add_group(coefs, layout.sto_out[rname], loss_w)
    elif family in (3, 4):
        sense = LE
        for name in con:
            _add_group(coefs, layout.gen[name], 1.0)
        if family == 3:
            rhs = (1.0 - phi) * total_demand
            loss_w = {"zero": 1.0, "proportionate": 1.0 - phi, "complete": 0.0}[slcr]
        else:
            rhs = 0.0
            for name in ren + con:
                _add_group(coefs, layout.gen[name], -(1.0 - phi))
            loss_w = {"zero": phi, "proportionate": 0.0, "complete": -(1.0 - phi)}[slcr]
        for rname in layout.sto_in:
            _add_group(coefs, layout.sto_in[rname], -loss_w)
            _add_group(coefs, layout.sto_out[rname], loss_w)
    else:
        raise ValueError(f"unknown constraint family {family}")
    return coefs, sense, rhs


def potential_share_row(phi: float, layout: VarLayout, s: Scenario) -> tuple[dict[int, float], str, float]:
    """Pre-curtailment target: sum_t availability * C_s >= phi * sum_t d_t."""
    if not (0.0 <= phi <= 1.0):
        raise ValueError("phi must lie in [0, 1]")
    coefs: dict[int, float] = {}
    for t in s.renewables:
        coefs[layout.cap[t.name]] = float(np.sum(t.availability_series(s.horizon)))
    return coefs, GE, phi * float(np.sum(s.demand))


def capacity_target_rows(targets, layout: VarLayout, s: Scenario):
    """Exogenous minimum-capacity rows C_s >= target, renewables only."""
    rows = []
    names = {t.name: t for t in s.technologies}
    for name, target in (targets or {}).items():
        if name not in names or names[name].kind != RENEWABLE:
            raise ValueError(f"capacity target on unknown or non-renewable technology {name!r}")
        rows.append((name, ({layout.cap[name]: 1.0}, GE, float(target))))
    return rows
