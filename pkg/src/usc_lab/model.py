"""Domain types: technologies, storage units, policy targets, and scenarios.

Also houses the shared plumbing every other module relies on: scenario
validation, cost annualization, and synthetic availability/demand series
for desk-scale runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

RENEWABLE = "renewable"
CONVENTIONAL = "conventional"

#: SLCR = share of storage conversion losses the renewable target must cover.
SLCR_LEVELS = ("zero", "proportionate", "complete")

_SLCR_SUFFIX = {"zero": "a", "proportionate": "b", "complete": "c"}
_SUFFIX_SLCR = {v: k for k, v in _SLCR_SUFFIX.items()}

POLICY_KINDS = (
    "renewable_share",
    "potential_share",
    "capacity_target",
    "carbon_cap",
    "carbon_price",
    "none",
)

HOURS_PER_YEAR = 8760


def variant_label(family: int, slcr: str) -> str:
    """Short label for a renewable-share constraint variant, e.g. (1, 'complete') -> '1c'."""
    return f"{family}{_SLCR_SUFFIX[slcr]}"


def parse_variant(label: str) -> tuple[int, str]:
    """Inverse of :func:`variant_label`: '3b' -> (3, 'proportionate')."""
    family = int(label[:-1])
    slcr = _SUFFIX_SLCR[label[-1]]
    if family not in (1, 2, 3, 4):
        raise ValueError(f"unknown constraint family in {label!r}")
    return family, slcr


def _frozen_series(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Technology:
    """A generation technology aggregate.

    Costs are annualized EUR/MW-year for capacity (fixed O&M folded in) and
    EUR/MWh for dispatch.  ``availability`` is the hourly capacity factor in
    [0, 1]; ``None`` means firm (constant 1.0, the conventional default).
    """

    name: str
    kind: str  # RENEWABLE or CONVENTIONAL
    capacity_cost: float
    variable_cost: float = 0.0
    availability: Optional[np.ndarray] = None
    curtailment_cost: float = 0.0
    emission_factor: float = 0.0  # tCO2/MWh

    def __post_init__(self):
        if self.availability is not None:
            object.__setattr__(self, "availability", _frozen_series(self.availability))

    def availability_series(self, horizon: int) -> np.ndarray:
        if self.availability is None:
            return np.ones(horizon)
        return np.asarray(self.availability)


@dataclass(frozen=True)
class Storage:
    """An electricity storage unit with separate charge/discharge/energy sizing.

    ``charge_cost``/``discharge_cost`` are EUR/MW-year, ``energy_cost`` is
    EUR/MWh-year; all annualized.  ``eta_in``/``eta_out`` are one-way
    conversion efficiencies, ``self_discharge`` the per-hour retention
    factor (1.0 = no standing loss).
    """

    name: str
    charge_cost: float
    discharge_cost: float
    energy_cost: float
    var_charge_cost: float = 0.0
    var_discharge_cost: float = 0.0
    eta_in: float = 1.0
    eta_out: float = 1.0
    self_discharge: float = 1.0

    @property
    def eta_roundtrip(self) -> float:
        return self.eta_in * self.eta_out


@dataclass(frozen=True)
class PolicySpec:
    """Which (if any) policy constraint the scenario carries.

    For ``renewable_share``, ``family`` selects the constraint shape
    (1: min renewable share of demand, 2: of generation; 3: max conventional
    share of demand, 4: of generation) and ``slcr`` the loss-coverage level.
    """

    kind: str = "none"
    family: Optional[int] = None
    slcr: Optional[str] = None
    phi: Optional[float] = None
    cap: Optional[float] = None  # tCO2 budget for carbon_cap
    price: Optional[float] = None  # EUR/tCO2 for carbon_price
    capacity_targets: Optional[Mapping[str, float]] = None  # MW per renewable

    def __post_init__(self):
        if self.capacity_targets is not None:
            object.__setattr__(self, "capacity_targets", dict(self.capacity_targets))

    @staticmethod
    def none() -> "PolicySpec":
        return PolicySpec(kind="none")

    @staticmethod
    def renewable_share(family: int, slcr: str, phi: float) -> "PolicySpec":
        return PolicySpec(kind="renewable_share", family=family, slcr=slcr, phi=phi)

    @staticmethod
    def from_variant(label: str, phi: float) -> "PolicySpec":
        family, slcr = parse_variant(label)
        return PolicySpec.renewable_share(family, slcr, phi)

    @staticmethod
    def potential_share(phi: float) -> "PolicySpec":
        return PolicySpec(kind="potential_share", phi=phi)

    @staticmethod
    def capacity_target(targets: Mapping[str, float]) -> "PolicySpec":
        return PolicySpec(kind="capacity_target", capacity_targets=dict(targets))

    @staticmethod
    def carbon_cap(cap: float) -> "PolicySpec":
        return PolicySpec(kind="carbon_cap", cap=cap)

    @staticmethod
    def carbon_price(price: float) -> "PolicySpec":
        return PolicySpec(kind="carbon_price", price=price)

    @property
    def variant(self) -> Optional[str]:
        if self.kind == "renewable_share":
            return variant_label(self.family, self.slcr)
        return None


@dataclass(frozen=True)
class Scenario:
    """A full model instance: horizon, demand, technology set, policy."""

    horizon: int
    demand: np.ndarray
    technologies: tuple[Technology, ...]
    storages: tuple[Storage, ...] = ()
    policy: PolicySpec = field(default_factory=PolicySpec.none)
    wrap_storage_level: bool = True

    def __post_init__(self):
        object.__setattr__(self, "demand", _frozen_series(self.demand))
        object.__setattr__(self, "technologies", tuple(self.technologies))
        object.__setattr__(self, "storages", tuple(self.storages))

    @property
    def renewables(self) -> tuple[Technology, ...]:
        return tuple(t for t in self.technologies if t.kind == RENEWABLE)

    @property
    def conventionals(self) -> tuple[Technology, ...]:
        return tuple(t for t in self.technologies if t.kind == CONVENTIONAL)

    def technology(self, name: str) -> Technology:
        for t in self.technologies:
            if t.name == name:
                return t
        raise KeyError(name)

    def storage(self, name: str) -> Storage:
        for r in self.storages:
            if r.name == name:
                return r
        raise KeyError(name)


@dataclass(frozen=True)
class Violation:
    """One failed scenario invariant, machine-readable code plus message."""

    code: str
    message: str

    def __str__(self):  # pragma: no cover - cosmetic
        return f"[{self.code}] {self.message}"


def validate_scenario(s: Scenario) -> list[Violation]:
    """Check every scenario invariant; an empty list means the scenario is valid."""
    v: list[Violation] = []
    T = s.horizon

    if T < 2:
        v.append(Violation("horizon_too_short", f"horizon must be >= 2, got {T}"))
    if len(s.demand) != T:
        v.append(
            Violation(
                "series_length_mismatch",
                f"demand has {len(s.demand)} entries, horizon is {T}",
            )
        )
    if np.any(np.asarray(s.demand) < 0):
        v.append(Violation("demand_negative", "demand must be non-negative"))
    if not s.technologies:
        v.append(Violation("no_technologies", "at least one technology is required"))

    seen: set[str] = set()
    for t in s.technologies:
        if t.name in seen:
            v.append(Violation("duplicate_name", f"duplicate technology name {t.name!r}"))
        seen.add(t.name)
        if t.kind not in (RENEWABLE, CONVENTIONAL):
            v.append(Violation("unknown_class", f"{t.name}: unknown class {t.kind!r}"))
        for label, cost in (
            ("capacity_cost", t.capacity_cost),
            ("variable_cost", t.variable_cost),
            ("curtailment_cost", t.curtailment_cost),
        ):
            if cost < 0:
                v.append(Violation("cost_negative", f"{t.name}: {label} must be >= 0"))
        if t.emission_factor < 0:
            v.append(Violation("cost_negative", f"{t.name}: emission_factor must be >= 0"))
        if t.availability is not None:
            avail = np.asarray(t.availability)
            if len(avail) != T:
                v.append(
                    Violation(
                        "series_length_mismatch",
                        f"{t.name}: availability has {len(avail)} entries, horizon is {T}",
                    )
                )
            if avail.size and (avail.min() < 0 or avail.max() > 1):
                v.append(
                    Violation(
                        "availability_out_of_range",
                        f"{t.name}: availability values must lie in [0, 1]",
                    )
                )

    for r in s.storages:
        if r.name in seen:
            v.append(Violation("duplicate_name", f"duplicate storage name {r.name!r}"))
        seen.add(r.name)
        if not (0 < r.eta_in <= 1 and 0 < r.eta_out <= 1):
            v.append(Violation("eta_out_of_range", f"{r.name}: eta_in/eta_out must lie in (0, 1]"))
        if not (0 < r.self_discharge <= 1):
            v.append(
                Violation(
                    "self_discharge_out_of_range",
                    f"{r.name}: self_discharge must lie in (0, 1]",
                )
            )
        for label, cost in (
            ("charge_cost", r.charge_cost),
            ("discharge_cost", r.discharge_cost),
            ("energy_cost", r.energy_cost),
            ("var_charge_cost", r.var_charge_cost),
            ("var_discharge_cost", r.var_discharge_cost),
        ):
            if cost < 0:
                v.append(Violation("cost_negative", f"{r.name}: {label} must be >= 0"))

    v.extend(_validate_policy(s))
    return v


def _validate_policy(s: Scenario) -> list[Violation]:
    p = s.policy
    v: list[Violation] = []
    if p.kind not in POLICY_KINDS:
        v.append(Violation("unknown_policy", f"unknown policy kind {p.kind!r}"))
        return v
    if p.kind in ("renewable_share", "potential_share"):
        if p.phi is None or not (0 <= p.phi <= 1):
            v.append(Violation("phi_out_of_range", "phi must lie in [0, 1]"))
    if p.kind == "renewable_share":
        if p.family not in (1, 2, 3, 4):
            v.append(Violation("policy_incomplete", "renewable_share needs family in 1..4"))
        if p.slcr not in SLCR_LEVELS:
            v.append(Violation("policy_incomplete", f"slcr must be one of {SLCR_LEVELS}"))
    if p.kind == "capacity_target":
        targets = p.capacity_targets or {}
        if not targets:
            v.append(Violation("policy_incomplete", "capacity_target needs a target map"))
        names = {t.name: t for t in s.technologies}
        for name in targets:
            if name not in names:
                v.append(Violation("unknown_target_technology", f"no technology named {name!r}"))
            elif names[name].kind != RENEWABLE:
                v.append(
                    Violation(
                        "unknown_target_technology",
                        f"capacity target on non-renewable technology {name!r}",
                    )
                )
    if p.kind == "carbon_cap" and (p.cap is None or p.cap < 0):
        v.append(Violation("policy_incomplete", "carbon_cap needs a non-negative budget"))
    if p.kind == "carbon_price" and (p.price is None or p.price < 0):
        v.append(Violation("policy_incomplete", "carbon_price needs a non-negative price"))
    return v


def annualize(overnight: float, lifetime: float, rate: float, fixed_om: float = 0.0) -> float:
    """Annualized capacity cost in EUR/MW-year.

    ``overnight`` and ``fixed_om`` are EUR/kW and EUR/kW-year; the annuity
    factor is rate / (1 - (1 + rate)^-lifetime), degenerating to
    1/lifetime at rate zero.
    """
    if lifetime <= 0:
        raise ValueError("lifetime must be positive")
    if rate < 0:
        raise ValueError("rate must be non-negative")
    # -expm1(-n*log1p(r)) is 1-(1+r)^-n without cancellation for tiny rates.
    denominator = -np.expm1(-lifetime * np.log1p(rate))
    factor = 1.0 / lifetime if denominator == 0.0 else rate / denominator
    return 1000.0 * (overnight * factor + fixed_om)


def synth_profiles(seed: int, horizon: int) -> dict[str, np.ndarray]:
    """Deterministic synthetic availability profiles for solar PV and wind.

    PV is a diurnal half-sine (daylight 06:00-18:00, zero at night) with
    day-to-day amplitude noise; wind is a mean-reverting autocorrelated
    walk.  Both are clipped to [0, 1] and identical for identical seeds.
    """
    if horizon < 24:
        raise ValueError("horizon must be at least 24 hours")
    rng = np.random.default_rng(seed)
    hours = np.arange(horizon)
    hour_of_day = hours % 24

    elevation = np.clip(np.sin(np.pi * (hour_of_day - 6) / 12.0), 0.0, None)
    n_days = horizon // 24 + 1
    amplitude = np.clip(rng.normal(0.85, 0.15, size=n_days), 0.05, 1.0)
    pv = np.clip(elevation * amplitude[hours // 24], 0.0, 1.0)

    wind = np.empty(horizon)
    level = 0.35
    shocks = rng.standard_normal(horizon)
    for t in range(horizon):
        level = level + 0.10 * (0.35 - level) + 0.09 * shocks[t]
        level = min(max(level, 0.0), 1.0)
        wind[t] = level
    return {"pv": pv, "wind": wind}


def default_demand(horizon: int, annual_energy_mwh: float = 520e6) -> np.ndarray:
    """Flat demand with a mild diurnal ripple, scaled to horizon/8760 of a year."""
    total = annual_energy_mwh * horizon / HOURS_PER_YEAR
    hours = np.arange(horizon)
    shape = 1.0 + 0.08 * np.sin(2 * np.pi * ((hours % 24) - 9) / 24.0)
    return shape * (total / shape.sum())


# Stylized German-like parameterization: overnight cost EUR/kW(h), annual
# fixed O&M EUR/kW, variable cost EUR/MWh, lifetime years, emissions tCO2/MWh.
DEFAULT_RATE = 0.04

DEFAULT_GENERATORS = {
    "coal": dict(kind=CONVENTIONAL, overnight=1300.0, fixed_om=25.0, variable=21.55, lifetime=40, emission=0.9),
    "ocgt": dict(kind=CONVENTIONAL, overnight=400.0, fixed_om=1.5, variable=76.34, lifetime=30, emission=0.4),
    "pv": dict(kind=RENEWABLE, overnight=390.0, fixed_om=10.6, variable=0.0, lifetime=25, emission=0.0),
    "wind": dict(kind=RENEWABLE, overnight=1000.0, fixed_om=20.0, variable=0.0, lifetime=25, emission=0.0),
}

# Storage power costs are quoted per kW-year (already annualized); the energy
# cost is an overnight EUR/kWh figure annuitized over 50 years.
DEFAULT_STORAGE = dict(
    charge_cost=1.1 * 1000.0,
    discharge_cost=1.1 * 1000.0,
    energy_overnight=80.0,
    energy_lifetime=50,
    var_cost=0.5,
    roundtrip=0.8,
)


def default_technologies(horizon: int, seed: int = 42, rate: float = DEFAULT_RATE) -> tuple[Technology, ...]:
    profiles = synth_profiles(seed, horizon)
    techs = []
    for name, p in DEFAULT_GENERATORS.items():
        techs.append(
            Technology(
                name=name,
                kind=p["kind"],
                capacity_cost=annualize(p["overnight"], p["lifetime"], rate, p["fixed_om"]),
                variable_cost=p["variable"],
                availability=profiles.get(name),
                emission_factor=p["emission"],
            )
        )
    return tuple(techs)


def default_storage(rate: float = DEFAULT_RATE) -> Storage:
    eta = float(np.sqrt(DEFAULT_STORAGE["roundtrip"]))
    return Storage(
        name="storage",
        charge_cost=DEFAULT_STORAGE["charge_cost"],
        discharge_cost=DEFAULT_STORAGE["discharge_cost"],
        energy_cost=annualize(DEFAULT_STORAGE["energy_overnight"], DEFAULT_STORAGE["energy_lifetime"], rate),
        var_charge_cost=DEFAULT_STORAGE["var_cost"],
        var_discharge_cost=DEFAULT_STORAGE["var_cost"],
        eta_in=eta,
        eta_out=eta,
    )


def default_scenario(
    horizon: int = 672,
    seed: int = 42,
    policy: Optional[PolicySpec] = None,
    with_storage: bool = True,
    rate: float = DEFAULT_RATE,
) -> Scenario:
    """The bundled desk-scale scenario: coal/ocgt/pv/wind plus one storage."""
    return Scenario(
        horizon=horizon,
        demand=default_demand(horizon),
        technologies=default_technologies(horizon, seed=seed, rate=rate),
        storages=(default_storage(rate),) if with_storage else (),
        policy=policy if policy is not None else PolicySpec.none(),
    )
