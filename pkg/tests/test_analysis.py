import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from usc_lab import analysis
from usc_lab.analysis import (
    CyclingReport,
    decompose_cycling,
    detect_cycling,
    emissions,
    lcos,
    market_value,
    nsl,
    reported_share,
    rldc,
    tagged_prices,
    zero_profit_residual,
)
from usc_lab.formulation import VarLayout
from usc_lab.harness import solve_scenario
from usc_lab.lp import Solution
from usc_lab.model import PolicySpec, Scenario, Storage, Technology

from conftest import small_scenario


class TestDecomposeCycling:
    def test_equal_flows_worked_example(self):
        e = decompose_cycling(10.0, 10.0, 0.64)
        assert e.kind == 1
        assert e.spc == pytest.approx(10.0, abs=1e-9)
        assert e.apc == pytest.approx(5.625, abs=1e-9)
        assert e.unintended_discharge == pytest.approx(10.0, abs=1e-9)
        assert e.unintended_losses == pytest.approx(5.625, abs=1e-9)
        assert e.total_unintended == pytest.approx(25.625, abs=1e-9)
        assert e.intended_charge == pytest.approx(0.0, abs=1e-9)
        assert e.intended_discharge == pytest.approx(0.0, abs=1e-9)

    def test_discharge_only_is_no_event(self):
        e = decompose_cycling(0.0, 5.0, 0.8)
        assert e.kind == 0
        assert e.spc == e.apc == e.unintended_discharge == e.unintended_losses == 0.0
        assert e.intended_discharge == 5.0

    def test_charge_dominated_without_apc(self):
        e = decompose_cycling(10.0, 4.0, 0.64)
        assert e.kind == 4
        assert e.spc == pytest.approx(6.25, abs=1e-12)
        assert e.apc == pytest.approx(0.0, abs=1e-12)
        assert e.unintended_losses == pytest.approx(2.25, abs=1e-12)
        assert e.intended_charge == pytest.approx(3.75, abs=1e-12)

    def test_discharge_dominated(self):
        e = decompose_cycling(4.0, 10.0, 0.64)
        assert e.kind == 2
        assert e.spc == pytest.approx(4.0, abs=1e-12)
        assert e.apc == pytest.approx(2.25, abs=1e-12)
        assert e.unintended_losses == pytest.approx(2.25, abs=1e-12)
        assert e.intended_discharge == pytest.approx(6.0, abs=1e-12)

    def test_type3_has_both_spc_and_apc(self):
        e = decompose_cycling(10.0, 8.0, 0.64)
        assert e.kind == 3
        assert e.apc > 0 and e.spc > 0

    def test_bad_efficiency_rejected(self):
        with pytest.raises(ValueError):
            decompose_cycling(1.0, 1.0, 0.0)
        with pytest.raises(ValueError):
            decompose_cycling(1.0, 1.0, 1.2)

    @given(
        charge=st.floats(0, 1e4),
        discharge=st.floats(0, 1e4),
        eta=st.floats(0.05, 1.0),
    )
    @settings(max_examples=300, deadline=None)
    def test_reconstruction_identities(self, charge, discharge, eta):
        e = decompose_cycling(charge, discharge, eta)
        u_out = min(charge, discharge)
        scale = 1e-9 * (1 + charge + discharge)
        assert e.spc >= -scale and e.apc >= -scale
        assert e.intended_charge >= -scale and e.intended_discharge >= -scale
        if e.kind > 0:
            assert e.spc + e.apc + e.unintended_discharge == pytest.approx(
                e.total_unintended, rel=1e-12
            )
            assert e.unintended_losses == pytest.approx(u_out * (1 / eta - 1), rel=1e-9, abs=1e-12)
            assert e.intended_charge + e.spc + e.apc == pytest.approx(charge + e.apc, rel=1e-9, abs=1e-9)
        assert e.intended_charge + e.spc == pytest.approx(charge, rel=1e-12, abs=1e-9)
        assert e.intended_discharge + e.unintended_discharge == pytest.approx(
            discharge, rel=1e-12, abs=1e-9
        )


def synthetic_run(charge, discharge, lam=None, eta=0.8, level=None, caps=(10.0, 10.0, 40.0)):
    """Assemble a hand-built Solution/VarLayout pair around given storage flows."""
    T = len(charge)
    layout = VarLayout(horizon=T)
    n = 0
    layout.sto_cap["sto"] = {"in": 0, "out": 1, "level": 2}
    n = 3
    layout.sto_in["sto"] = np.arange(n, n + T); n += T
    layout.sto_out["sto"] = np.arange(n, n + T); n += T
    layout.sto_level["sto"] = np.arange(n, n + T); n += T
    layout.balance_rows = np.arange(T)
    primal = np.zeros(n)
    primal[0:3] = caps
    primal[layout.sto_in["sto"]] = charge
    primal[layout.sto_out["sto"]] = discharge
    if level is not None:
        primal[layout.sto_level["sto"]] = level
    dual = np.zeros(T) if lam is None else np.asarray(lam, dtype=float)
    sol = Solution("optimal", 0.0, primal, dual, np.zeros(n))
    storage = Storage(
        "sto",
        charge_cost=7.0,
        discharge_cost=5.0,
        energy_cost=2.0,
        var_charge_cost=0.5,
        var_discharge_cost=0.5,
        eta_in=np.sqrt(eta),
        eta_out=np.sqrt(eta),
    )
    scenario = Scenario(
        horizon=T,
        demand=np.ones(T),
        technologies=(Technology("conv", "conventional", capacity_cost=1.0),),
        storages=(storage,),
    )
    return scenario, sol, layout


class TestDetect:
    def test_single_simultaneous_hour_yields_one_event(self):
        scenario, sol, layout = synthetic_run([0.0, 3.0, 1.0], [2.0, 3.0, 0.0])
        report = detect_cycling(sol, layout, scenario.storages)
        assert report.hours == 1
        assert len(report.events) == 1
        assert report.events[0].hour == 1
        assert report.events[0].kind == 1

    def test_totals_are_sums_of_event_fields(self):
        scenario, sol, layout = synthetic_run([5.0, 3.0, 2.0], [2.0, 3.0, 0.5])
        report = detect_cycling(sol, layout, scenario.storages)
        assert report.spc_total == pytest.approx(sum(e.spc for e in report.events))
        assert report.apc_total == pytest.approx(sum(e.apc for e in report.events))
        assert report.total_unintended_energy == pytest.approx(
            sum(e.total_unintended for e in report.events)
        )

    def test_no_simultaneity_no_events(self):
        scenario, sol, layout = synthetic_run([1.0, 0.0], [0.0, 0.9])
        report = detect_cycling(sol, layout, scenario.storages)
        assert report.hours == 0 and report.events == []


class TestStorageEconomics:
    def test_two_hour_arbitrage_lcos_by_hand(self):
        # Charge 1 MWh at price 0, discharge eta at price 100.
        scenario, sol, layout = synthetic_run(
            [1.0, 0.0], [0.0, 0.8], lam=[0.0, 100.0], eta=0.8, caps=(1.0, 0.8, 1.0)
        )
        r = scenario.storages[0]
        got = lcos(sol, layout, scenario, "sto")
        capex = 7.0 * 1.0 + 5.0 * 0.8 + 2.0 * 1.0
        opex = 0.5 * 1.0 + 0.5 * 0.8
        hand = (capex + opex + 0.0 * 1.0) / 0.8
        assert got == pytest.approx(hand, rel=1e-12)
        assert market_value(sol, layout, "sto") == pytest.approx(100.0, rel=1e-12)
        assert nsl(sol, layout, "sto") == pytest.approx(0.2 / 0.8, rel=1e-12)

    def test_lcos_homogeneous_in_costs(self):
        scenario, sol, layout = synthetic_run(
            [1.0, 0.0], [0.0, 0.8], lam=[4.0, 100.0], eta=0.8, caps=(1.0, 0.8, 1.0)
        )
        base = lcos(sol, layout, scenario, "sto")
        doubled_storage = dataclasses.replace(
            scenario.storages[0],
            charge_cost=14.0, discharge_cost=10.0, energy_cost=4.0,
            var_charge_cost=1.0, var_discharge_cost=1.0,
        )
        scenario2 = dataclasses.replace(scenario, storages=(doubled_storage,))
        sol2 = dataclasses.replace(sol, dual=sol.dual * 2)
        assert lcos(sol2, layout, scenario2, "sto") == pytest.approx(2 * base, rel=1e-12)

    def test_constant_price_market_value(self):
        scenario, sol, layout = synthetic_run([0.0, 0.0], [1.0, 3.0], lam=[42.0, 42.0])
        assert market_value(sol, layout, "sto") == pytest.approx(42.0)

    def test_zero_discharge_is_undefined(self):
        scenario, sol, layout = synthetic_run([1.0, 1.0], [0.0, 0.0])
        assert lcos(sol, layout, scenario, "sto") is None
        assert market_value(sol, layout, "sto") is None
        assert nsl(sol, layout, "sto") is None
        with pytest.raises(ValueError):
            zero_profit_residual(scenario, sol, layout, "sto")

    def test_steady_cycling_nsl(self):
        scenario, sol, layout = synthetic_run([1.0, 1.0], [0.8, 0.8], eta=0.8)
        assert nsl(sol, layout, "sto") == pytest.approx(0.25, rel=1e-12)
        scenario2, sol2, layout2 = synthetic_run([1.0, 1.0], [1.0, 1.0], eta=1.0)
        assert nsl(sol2, layout2, "sto") == pytest.approx(0.0, abs=1e-12)


class TestZeroProfit:
    @pytest.mark.parametrize(
        "policy",
        [
            PolicySpec.renewable_share(1, "complete", 0.7),
            PolicySpec.renewable_share(1, "zero", 0.7),
            PolicySpec.renewable_share(3, "zero", 0.7),
            PolicySpec.renewable_share(2, "proportionate", 0.7),
            PolicySpec.renewable_share(4, "complete", 0.7),
        ],
    )
    def test_residual_vanishes_on_optimal_runs(self, policy):
        run = solve_scenario(small_scenario(T=72, policy=policy), backend="embedded")
        assert run.status == "optimal"
        value = market_value(run.solution, run.layout, "store")
        if value is None:
            pytest.skip("storage not built under this policy")
        residual = zero_profit_residual(run.scenario, run.solution, run.layout, "store")
        assert abs(residual) <= 1e-4 * abs(value)

    def test_non_binding_policy_reduces_to_lcos_vs_mv(self):
        # Cheap renewables push the unconstrained share far above phi, so the
        # policy dual is zero and the condition collapses to LCOS vs MV.
        scenario = small_scenario(T=72, policy=PolicySpec.renewable_share(1, "complete", 0.01))
        cheap_sun = dataclasses.replace(scenario.technologies[1], capacity_cost=150.0)
        scenario = dataclasses.replace(scenario, technologies=(scenario.technologies[0], cheap_sun))
        run = solve_scenario(scenario, backend="embedded")
        mu = analysis.policy_shadow_price(run.solution, run.layout, run.scenario)
        assert mu == pytest.approx(0.0, abs=1e-9)
        value = market_value(run.solution, run.layout, "store")
        if value is None:
            pytest.skip("storage not built")
        residual = zero_profit_residual(run.scenario, run.solution, run.layout, "store")
        cost = lcos(run.solution, run.layout, run.scenario, "store")
        assert residual == pytest.approx(cost - value, rel=1e-12)

    def test_k_sign_flip_between_1c_and_3a(self):
        # Same solution economics, mirrored constraint: 1c carries +1, 3a -1;
        # both residuals must still vanish with the correctly signed mu.
        for family, slcr in ((1, "complete"), (3, "zero")):
            run = solve_scenario(
                small_scenario(T=72, policy=PolicySpec.renewable_share(family, slcr, 0.7)),
                backend="embedded",
            )
            value = market_value(run.solution, run.layout, "store")
            mu = analysis.policy_shadow_price(run.solution, run.layout, run.scenario)
            assert mu >= -1e-9
            if value is None:
                pytest.skip("storage not built")
            residual = zero_profit_residual(run.scenario, run.solution, run.layout, "store")
            assert abs(residual) <= 1e-4 * abs(value)
            cost = lcos(run.solution, run.layout, run.scenario, "store")
            losses = nsl(run.solution, run.layout, "store")
            k = analysis.ZERO_PROFIT_K[(family, slcr)](0.7)
            assert cost + k * mu * losses - value == pytest.approx(residual)


class TestSystemViews:
    def test_rldc_without_renewables_is_sorted_demand(self):
        scenario = small_scenario(T=24, storage=False)
        scenario = dataclasses.replace(scenario, technologies=(scenario.technologies[0],))
        run = solve_scenario(scenario, backend="embedded")
        curves = rldc(run.solution, run.layout, scenario)
        expected = np.sort(np.asarray(scenario.demand))[::-1]
        for series in (curves.raw, curves.after_curtailment, curves.after_storage):
            np.testing.assert_allclose(series, expected, atol=1e-9)

    def test_rldc_identities_on_policy_run(self):
        run = solve_scenario(
            small_scenario(T=72, policy=PolicySpec.renewable_share(1, "zero", 0.7)),
            backend="embedded",
        )
        curves = rldc(run.solution, run.layout, run.scenario)
        for series in (curves.raw, curves.after_curtailment, curves.after_storage):
            assert np.all(np.diff(series) <= 1e-9)
        conv_total = sum(
            run.layout.generation(run.solution, t.name).sum()
            for t in run.scenario.conventionals
        )
        assert curves.after_storage.sum() == pytest.approx(conv_total, rel=1e-9, abs=1e-6)

    def test_reported_share_orderings(self):
        run = solve_scenario(
            small_scenario(T=72, policy=PolicySpec.renewable_share(1, "complete", 0.7)),
            backend="embedded",
        )
        args = (run.solution, run.layout, run.scenario)
        for family in (1, 2, 3, 4):
            zero = reported_share(*args, family, "zero")
            complete = reported_share(*args, family, "complete")
            assert zero >= complete - 1e-12

    def test_fully_renewable_system_reports_one_under_proportionate(self):
        scenario = small_scenario(T=48, policy=PolicySpec.renewable_share(2, "proportionate", 1.0))
        # Give the renewable nonzero availability everywhere so 100% is feasible.
        vre = dataclasses.replace(
            scenario.technologies[1],
            availability=np.clip(scenario.technologies[1].availability + 0.15, 0.05, 1.0),
        )
        scenario = dataclasses.replace(
            scenario, technologies=(scenario.technologies[0], vre)
        )
        run = solve_scenario(scenario, backend="embedded")
        assert run.status == "optimal"
        conv = sum(run.layout.generation(run.solution, t.name).sum() for t in scenario.conventionals)
        assert conv <= 1e-6
        share = reported_share(run.solution, run.layout, scenario, 2, "proportionate")
        assert share == pytest.approx(1.0, abs=1e-9)

    def test_emissions_scaling(self):
        run = solve_scenario(small_scenario(T=48), backend="embedded")
        base = emissions(run.solution, run.layout, run.scenario)
        gas_gen = run.layout.generation(run.solution, "gas").sum()
        assert base == pytest.approx(0.4 * gas_gen, rel=1e-12)
        doubled = dataclasses.replace(
            run.scenario,
            technologies=tuple(
                dataclasses.replace(t, emission_factor=2 * t.emission_factor)
                for t in run.scenario.technologies
            ),
        )
        assert emissions(run.solution, run.layout, doubled) == pytest.approx(2 * base, rel=1e-12)
        zeroed = dataclasses.replace(
            run.scenario,
            technologies=tuple(
                dataclasses.replace(t, emission_factor=0.0) for t in run.scenario.technologies
            ),
        )
        assert emissions(run.solution, run.layout, zeroed) == 0.0

    def test_tagged_prices_match_cycling_flags(self):
        scenario, sol, layout = synthetic_run([1.0, 2.0, 0.0], [0.9, 2.0, 1.0], lam=[1.0, 2.0, 3.0])
        report = detect_cycling(sol, layout, scenario.storages)
        tags = tagged_prices(sol, layout, report)
        assert sum(flag for _, _, flag in tags) == report.hours
        assert [lam for _, lam, _ in tags] == [1.0, 2.0, 3.0]


class TestScalingInvariance:
    def test_cost_scaling_preserves_primal_and_scales_duals(self):
        scenario = small_scenario(T=48, policy=PolicySpec.renewable_share(1, "zero", 0.7))
        run = solve_scenario(scenario, backend="embedded")
        scaled = dataclasses.replace(
            scenario,
            technologies=tuple(
                dataclasses.replace(
                    t,
                    capacity_cost=3 * t.capacity_cost,
                    variable_cost=3 * t.variable_cost,
                    curtailment_cost=3 * t.curtailment_cost,
                )
                for t in scenario.technologies
            ),
            storages=tuple(
                dataclasses.replace(
                    r,
                    charge_cost=3 * r.charge_cost,
                    discharge_cost=3 * r.discharge_cost,
                    energy_cost=3 * r.energy_cost,
                    var_charge_cost=3 * r.var_charge_cost,
                    var_discharge_cost=3 * r.var_discharge_cost,
                )
                for r in scenario.storages
            ),
        )
        run2 = solve_scenario(scaled, backend="embedded")
        assert run2.solution.objective == pytest.approx(3 * run.solution.objective, rel=1e-9)
        # Degenerate ties (equal-price storage scheduling) may pick another
        # optimal vertex, so assert the pinned aggregates ...
        for t in scenario.technologies:
            assert run2.layout.capacity(run2.solution, t.name) == pytest.approx(
                run.layout.capacity(run.solution, t.name), rel=1e-7, abs=1e-6
            )
            assert run2.layout.generation(run2.solution, t.name).sum() == pytest.approx(
                run.layout.generation(run.solution, t.name).sum(), rel=1e-7, abs=1e-6
            )
        assert run2.cycling.total_unintended_energy == pytest.approx(
            run.cycling.total_unintended_energy, rel=1e-7, abs=1e-6
        )
        # ... and that the base solution, costs and duals scaled by 3, stays
        # optimal for the scaled problem (argmin invariance proper).
        from usc_lab.lp import check_kkt

        transplanted = dataclasses.replace(
            run.solution,
            objective=3 * run.solution.objective,
            dual=3 * run.solution.dual,
            reduced_costs=3 * run.solution.reduced_costs,
        )
        assert check_kkt(run2.problem, transplanted).passed
