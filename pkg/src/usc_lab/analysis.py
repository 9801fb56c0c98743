"""Post-solution diagnostics.

Cycling detection splits every hour with simultaneous charging and
discharging into same-period cycling (SPC), across-period cycling (APC),
and the unintended discharge itself; the economic layer computes levelized
storage cost, market value, normalized losses, and the zero-profit residual
implied by the active policy variant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .formulation import VarLayout
from .lp import Solution
from .model import PolicySpec, Scenario, variant_label

SIMULTANEITY_TOL = 1e-6


@dataclass(frozen=True)
class CyclingEvent:
    """One hour of simultaneous charging and discharging, decomposed.

    Energy accounting (all MWh): ``spc`` and ``apc`` are the charge-side
    energies (losses included) attributable to same-period and across-period
    cycling; together with the unintended discharge they form the hour's
    total unintended storage use.  ``kind`` is 1 when charge equals
    discharge, 2 when discharge exceeds charge, 3/4 when charge dominates
    (3 with, 4 without an across-period contribution); 0 means the hour has
    no simultaneity at all.
    """

    hour: int
    storage: str
    charge: float
    discharge: float
    kind: int
    spc: float
    apc: float
    unintended_discharge: float
    unintended_losses: float
    intended_charge: float
    intended_discharge: float

    @property
    def total_unintended(self) -> float:
        return self.spc + self.apc + self.unintended_discharge


def decompose_cycling(
    charge: float,
    discharge: float,
    eta_rt: float,
    tol: float = SIMULTANEITY_TOL,
    hour: int = -1,
    storage: str = "",
) -> CyclingEvent:
    """Decompose one hour of storage flows into intended and unintended parts.

    The unintended discharge is min(charge, discharge); the part of it
    sustainable from the hour's own charging is eta_rt * charge, the rest
    must have been stored earlier.  Scaling both back to the charge side by
    1/eta_rt yields SPC and APC.
    """
    if eta_rt <= 0 or eta_rt > 1:
        raise ValueError("round-trip efficiency must lie in (0, 1]")
    if charge < 0 or discharge < 0:
        raise ValueError("flows must be non-negative")

    u_out = min(charge, discharge)
    if u_out <= tol:
        return CyclingEvent(
            hour, storage, charge, discharge, 0, 0.0, 0.0, 0.0, 0.0, charge, discharge
        )
    same_period = min(eta_rt * charge, discharge)
    spc = same_period / eta_rt
    apc = (u_out - same_period) / eta_rt
    losses = u_out * (1.0 / eta_rt - 1.0)
    if abs(charge - discharge) <= tol:
        kind = 1
    elif discharge > charge:
        kind = 2
    elif discharge > eta_rt * charge:
        kind = 3
    else:
        kind = 4
    return CyclingEvent(
        hour,
        storage,
        charge,
        discharge,
        kind,
        spc,
        apc,
        u_out,
        losses,
        charge - spc,
        discharge - u_out,
    )


@dataclass
class CyclingReport:
    """All cycling events of a solution plus annual aggregates."""

    events: list[CyclingEvent]
    horizon: int
    hours: int = 0
    spc_total: float = 0.0
    apc_total: float = 0.0
    unintended_discharge_total: float = 0.0
    unintended_losses_total: float = 0.0
    total_unintended_energy: float = 0.0
    hour_flags: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=bool))

    @staticmethod
    def from_events(events: list[CyclingEvent], horizon: int) -> "CyclingReport":
        flags = np.zeros(horizon, dtype=bool)
        for e in events:
            flags[e.hour] = True
        return CyclingReport(
            events=events,
            horizon=horizon,
            hours=int(flags.sum()),
            spc_total=sum(e.spc for e in events),
            apc_total=sum(e.apc for e in events),
            unintended_discharge_total=sum(e.unintended_discharge for e in events),
            unintended_losses_total=sum(e.unintended_losses for e in events),
            total_unintended_energy=sum(e.total_unintended for e in events),
            hour_flags=flags,
        )


def detect_cycling(
    sol: Solution,
    layout: VarLayout,
    storages: Sequence,
    tol: float = SIMULTANEITY_TOL,
) -> CyclingReport:
    """One CyclingEvent per (storage, hour) with simultaneous flows above tol."""
    events: list[CyclingEvent] = []
    for r in storages:
        charge = layout.charge(sol, r.name)
        discharge = layout.discharge(sol, r.name)
        hot = np.flatnonzero((charge > tol) & (discharge > tol))
        for h in hot:
            events.append(
                decompose_cycling(
                    float(charge[h]),
                    float(discharge[h]),
                    r.eta_roundtrip,
                    tol=tol,
                    hour=int(h),
                    storage=r.name,
                )
            )
    return CyclingReport.from_events(events, layout.horizon)


# -- storage economics --------------------------------------------------------


def _storage_flows(sol: Solution, layout: VarLayout, name: str):
    return layout.charge(sol, name), layout.discharge(sol, name)


def lcos(sol: Solution, layout: VarLayout, scenario: Scenario, name: str) -> Optional[float]:
    """Levelized cost of storage: all costs incl. charging power purchases per MWh discharged.

    Returns None when the unit never discharges.
    """
    r = scenario.storage(name)
    charge, discharge = _storage_flows(sol, layout, name)
    total_out = float(discharge.sum())
    if total_out <= SIMULTANEITY_TOL:
        return None
    lam = layout.prices(sol)
    capex = (
        r.charge_cost * layout.storage_capacity(sol, name, "in")
        + r.discharge_cost * layout.storage_capacity(sol, name, "out")
        + r.energy_cost * layout.storage_capacity(sol, name, "level")
    )
    opex = r.var_charge_cost * float(charge.sum()) + r.var_discharge_cost * total_out
    charging_cost = float(lam @ charge)
    return (capex + opex + charging_cost) / total_out


def market_value(sol: Solution, layout: VarLayout, name: str) -> Optional[float]:
    """Discharge-weighted average electricity price earned by the unit."""
    _, discharge = _storage_flows(sol, layout, name)
    total_out = float(discharge.sum())
    if total_out <= SIMULTANEITY_TOL:
        return None
    lam = layout.prices(sol)
    return float(lam @ discharge) / total_out


def nsl(sol: Solution, layout: VarLayout, name: str) -> Optional[float]:
    """Normalized storage conversion losses per MWh discharged."""
    charge, discharge = _storage_flows(sol, layout, name)
    total_out = float(discharge.sum())
    if total_out <= SIMULTANEITY_TOL:
        return None
    return (float(charge.sum()) - total_out) / total_out


#: Weight on mu * NSL in the zero-profit condition per (family, slcr); the
#: shadow price enters in its non-negative orientation for all families.
ZERO_PROFIT_K = {
    (1, "zero"): lambda phi: 0.0,
    (1, "proportionate"): lambda phi: phi,
    (1, "complete"): lambda phi: 1.0,
    (2, "zero"): lambda phi: -phi,
    (2, "proportionate"): lambda phi: 0.0,
    (2, "complete"): lambda phi: 1.0 - phi,
    (3, "zero"): lambda phi: -1.0,
    (3, "proportionate"): lambda phi: -(1.0 - phi),
    (3, "complete"): lambda phi: 0.0,
    (4, "zero"): lambda phi: -phi,
    (4, "proportionate"): lambda phi: 0.0,
    (4, "complete"): lambda phi: 1.0 - phi,
}


def policy_shadow_price(sol: Solution, layout: VarLayout, scenario: Scenario) -> float:
    """Shadow price of the policy row, oriented so tightening costs are >= 0.

    Families 1/2 enter the LP as >=-rows whose dual already carries that
    orientation; families 3/4 are <=-rows, so the sign flips.
    """
    if layout.policy_row is None:
        return 0.0
    dual = float(sol.dual[layout.policy_row])
    pol = scenario.policy
    if pol.kind == "renewable_share" and pol.family in (3, 4):
        return -dual
    return dual


def zero_profit_residual(
    scenario: Scenario, sol: Solution, layout: VarLayout, name: str
) -> float:
    """LCOS + k*mu*NSL - MV for the active policy variant (0 in equilibrium)."""
    cost = lcos(sol, layout, scenario, name)
    value = market_value(sol, layout, name)
    losses = nsl(sol, layout, name)
    if cost is None or value is None or losses is None:
        raise ValueError(f"zero-profit condition undefined: storage {name!r} never discharges")
    pol = scenario.policy
    if pol.kind == "renewable_share":
        k = ZERO_PROFIT_K[(pol.family, pol.slcr)](pol.phi)
        mu = policy_shadow_price(sol, layout, scenario)
    else:
        k, mu = 0.0, 0.0
    return cost + k * mu * losses - value


# -- system-level views -------------------------------------------------------


@dataclass
class RldcCurves:
    """Residual load duration curves, each sorted descending."""

    raw: np.ndarray
    after_curtailment: np.ndarray
    after_storage: np.ndarray


def rldc(sol: Solution, layout: VarLayout, scenario: Scenario) -> RldcCurves:
    """Residual load (demand net of renewable potential) plus augmented variants.

    The curtailment-augmented curve adds curtailed energy back; the storage-
    augmented curve further adds net storage charging, and therefore sums to
    total conventional generation.
    """
    T = scenario.horizon
    raw = np.asarray(scenario.demand, dtype=float).copy()
    for t in scenario.renewables:
        raw -= t.availability_series(T) * layout.capacity(sol, t.name)
    after_cu = raw.copy()
    for t in scenario.renewables:
        after_cu += layout.curtailment(sol, t.name)
    after_sto = after_cu.copy()
    for r in scenario.storages:
        after_sto += layout.charge(sol, r.name) - layout.discharge(sol, r.name)
    return RldcCurves(
        raw=np.sort(raw)[::-1],
        after_curtailment=np.sort(after_cu)[::-1],
        after_storage=np.sort(after_sto)[::-1],
    )


def _aggregates(sol: Solution, layout: VarLayout, scenario: Scenario):
    gen_r = sum(float(layout.generation(sol, t.name).sum()) for t in scenario.renewables)
    gen_c = sum(float(layout.generation(sol, t.name).sum()) for t in scenario.conventionals)
    loss = sum(
        float(layout.charge(sol, r.name).sum() - layout.discharge(sol, r.name).sum())
        for r in scenario.storages
    )
    demand = float(np.sum(scenario.demand))
    return gen_r, gen_c, gen_r + gen_c, loss, demand


def reported_share(
    sol: Solution, layout: VarLayout, scenario: Scenario, family: int, slcr: str
) -> float:
    """The phi that would make the (family, slcr) constraint exactly binding.

    This is the renewable share a run "reports" under a given accounting
    convention, independently of the constraint it was solved with.
    """
    gen_r, gen_c, gen, loss, demand = _aggregates(sol, layout, scenario)
    try:
        if family == 1:
            return {
                "zero": gen_r / demand,
                "proportionate": gen_r / (demand + loss),
                "complete": (gen_r - loss) / demand,
            }[slcr]
        if family == 2:
            return {
                "zero": gen_r / (gen - loss),
                "proportionate": gen_r / gen,
                "complete": (gen_r - loss) / (gen - loss),
            }[slcr]
        if family == 3:
            return {
                "zero": 1.0 - (gen_c - loss) / demand,
                "proportionate": 1.0 - gen_c / (demand + loss),
                "complete": 1.0 - gen_c / demand,
            }[slcr]
        if family == 4:
            return {
                "zero": (gen - gen_c) / (gen - loss),
                "proportionate": 1.0 - gen_c / gen,
                "complete": 1.0 - gen_c / (gen - loss),
            }[slcr]
    except ZeroDivisionError:
        raise ValueError("reported share undefined: zero base") from None
    raise ValueError(f"unknown constraint family {family}")


def emissions(sol: Solution, layout: VarLayout, scenario: Scenario) -> float:
    """Total emissions: emission factor times generation, summed over technologies."""
    return sum(
        t.emission_factor * float(layout.generation(sol, t.name).sum())
        for t in scenario.technologies
    )


def tagged_prices(
    sol: Solution, layout: VarLayout, cycling: CyclingReport
) -> list[tuple[int, float, bool]]:
    """Hourly price series with a flag marking hours of simultaneous cycling."""
    lam = layout.prices(sol)
    flags = cycling.hour_flags
    return [(int(t), float(lam[t]), bool(flags[t])) for t in range(len(lam))]


@dataclass
class MetricsReport:
    """Economic and system metrics of one optimal run."""

    lcos: dict[str, Optional[float]]
    mv: dict[str, Optional[float]]
    nsl: dict[str, Optional[float]]
    mu_policy: float
    zero_profit_residual: dict[str, Optional[float]]
    rldc: RldcCurves
    reported_shares: dict[str, float]
    emissions: float
    prices: list[tuple[int, float, bool]]


def compute_metrics(
    scenario: Scenario, sol: Solution, layout: VarLayout, cycling: CyclingReport
) -> MetricsReport:
    names = [r.name for r in scenario.storages]
    residuals: dict[str, Optional[float]] = {}
    for name in names:
        try:
            residuals[name] = zero_profit_residual(scenario, sol, layout, name)
        except ValueError:
            residuals[name] = None
    family = scenario.policy.family if scenario.policy.kind == "renewable_share" else 1
    shares = {
        slcr: reported_share(sol, layout, scenario, family, slcr)
        for slcr in ("zero", "proportionate", "complete")
    }
    return MetricsReport(
        lcos={n: lcos(sol, layout, scenario, n) for n in names},
        mv={n: market_value(sol, layout, n) for n in names},
        nsl={n: nsl(sol, layout, n) for n in names},
        mu_policy=policy_shadow_price(sol, layout, scenario),
        zero_profit_residual=residuals,
        rldc=rldc(sol, layout, scenario),
        reported_shares=shares,
        emissions=emissions(sol, layout, scenario),
        prices=tagged_prices(sol, layout, cycling),
    )
