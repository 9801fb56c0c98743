"""Shared fixtures: small hand-sized scenarios and cached desk-scale runs.

Desk-scale (672 h) runs go through the scipy backend for speed; the embedded
simplex is exercised directly by the solver tests and the oracle suite.
"""

import numpy as np
import pytest

from usc_lab.harness import solve_scenario
from usc_lab.model import PolicySpec, Scenario, Storage, Technology

DESK_BACKEND = "scipy"

FAMILIES = (1, 2, 3, 4)
SLCR = ("zero", "proportionate", "complete")


def small_scenario(
    T=48,
    policy=None,
    seed=3,
    storage=True,
    eta=0.9,
    var_cost=0.5,
    demand_level=100.0,
    wrap=True,
):
    """A hand-sized scenario with one conventional, one renewable, one storage."""
    rng = np.random.default_rng(seed)
    hod = np.arange(T) % 24
    sun = np.clip(np.sin(np.pi * (hod - 6) / 12.0), 0.0, None)
    avail = np.clip(sun * rng.uniform(0.5, 1.0, T), 0.0, 1.0)
    demand = demand_level * (1.0 + 0.1 * np.sin(2 * np.pi * hod / 24.0))
    storages = (
        Storage(
            "store",
            charge_cost=20.0,
            discharge_cost=20.0,
            energy_cost=150.0,
            var_charge_cost=var_cost,
            var_discharge_cost=var_cost,
            eta_in=eta,
            eta_out=eta,
        ),
    ) if storage else ()
    return Scenario(
        horizon=T,
        demand=demand,
        technologies=(
            Technology("gas", "conventional", capacity_cost=150.0, variable_cost=25.0, emission_factor=0.4),
            Technology("sun", "renewable", capacity_cost=700.0, availability=avail),
        ),
        storages=storages,
        policy=policy if policy is not None else PolicySpec.none(),
        wrap_storage_level=wrap,
    )


def random_tiny_scenario(rng):
    """Feasibility-by-construction tiny scenario for oracle comparisons."""
    T = int(rng.integers(2, 13))
    demand = rng.uniform(10.0, 120.0, T)
    avail = np.clip(rng.uniform(0.0, 1.0, T), 0.0, 1.0)
    techs = [
        Technology(
            "conv",
            "conventional",
            capacity_cost=float(rng.uniform(50, 500)),
            variable_cost=float(rng.uniform(5, 90)),
            emission_factor=float(rng.uniform(0.2, 1.0)),
        ),
        Technology(
            "vre",
            "renewable",
            capacity_cost=float(rng.uniform(50, 400)),
            variable_cost=float(rng.uniform(0, 5)),
            availability=avail,
            curtailment_cost=float(rng.choice([0.0, 0.0, rng.uniform(0, 3)])),
        ),
    ]
    storages = ()
    if rng.random() < 0.8:
        eta = float(rng.uniform(0.6, 1.0))
        storages = (
            Storage(
                "sto",
                charge_cost=float(rng.uniform(1, 60)),
                discharge_cost=float(rng.uniform(1, 60)),
                energy_cost=float(rng.uniform(1, 80)),
                var_charge_cost=float(rng.uniform(0.1, 2.0)),
                var_discharge_cost=float(rng.uniform(0.1, 2.0)),
                eta_in=eta,
                eta_out=eta,
            ),
        )
    roll = rng.random()
    if roll < 0.45:
        family = int(rng.integers(1, 5))
        slcr = ("zero", "proportionate", "complete")[int(rng.integers(0, 3))]
        policy = PolicySpec.renewable_share(family, slcr, float(rng.uniform(0.2, 0.9)))
    elif roll < 0.6:
        policy = PolicySpec.carbon_price(float(rng.uniform(0, 100)))
    elif roll < 0.7:
        policy = PolicySpec.potential_share(float(rng.uniform(0.2, 0.9)))
    else:
        policy = PolicySpec.none()
    return Scenario(
        horizon=T,
        demand=demand,
        technologies=tuple(techs),
        storages=storages,
        policy=policy,
        wrap_storage_level=bool(rng.random() < 0.9),
    )


@pytest.fixture(scope="session")
def desk_runs():
    """All 12 renewable-share variants at phi=0.8, desk scale, solved once."""
    from usc_lab.model import default_scenario

    runs = {}
    for family in FAMILIES:
        for slcr in SLCR:
            scenario = default_scenario(policy=PolicySpec.renewable_share(family, slcr, 0.8))
            runs[(family, slcr)] = solve_scenario(scenario, backend=DESK_BACKEND)
    return runs


@pytest.fixture(scope="session")
def desk_runs_phi1():
    """All 12 variants at phi=1.0 (full-renewable targets)."""
    from usc_lab.model import default_scenario

    runs = {}
    for family in FAMILIES:
        for slcr in SLCR:
            scenario = default_scenario(policy=PolicySpec.renewable_share(family, slcr, 1.0))
            runs[(family, slcr)] = solve_scenario(scenario, backend=DESK_BACKEND)
    return runs


@pytest.fixture(scope="session")
def desk_runs_eta1():
    """All 12 variants at phi=0.8 with a lossless storage unit."""
    import dataclasses

    from usc_lab.model import default_scenario

    runs = {}
    for family in FAMILIES:
        for slcr in SLCR:
            scenario = default_scenario(policy=PolicySpec.renewable_share(family, slcr, 0.8))
            scenario = dataclasses.replace(
                scenario,
                storages=tuple(
                    dataclasses.replace(r, eta_in=1.0, eta_out=1.0) for r in scenario.storages
                ),
            )
            runs[(family, slcr)] = solve_scenario(scenario, backend=DESK_BACKEND)
    return runs
