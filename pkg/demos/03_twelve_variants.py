"""Run all twelve renewable-share constraint variants side by side.

Four constraint families (share of demand / of generation, min-renewable /
max-conventional) times three loss-coverage levels.  Only the complete
loss-coverage variants avoid simultaneous cycling; the zero and
proportionate ones buy lower objectives with artificial storage losses.
"""

from usc_lab.harness import solve_scenario
from usc_lab.model import PolicySpec, default_scenario, variant_label

print(f"{'variant':>8}{'objective':>16}{'cycling h':>10}{'unint. MWh':>13}{'curtail MWh':>13}{'mu':>8}")
for family in (1, 2, 3, 4):
    for slcr in ("zero", "proportionate", "complete"):
        scenario = default_scenario(policy=PolicySpec.renewable_share(family, slcr, 0.8))
        run = solve_scenario(scenario, backend="scipy")
        curtailed = sum(
            float(run.layout.curtailment(run.solution, t.name).sum())
            for t in scenario.renewables
        )
        print(
            f"{variant_label(family, slcr):>8}"
            f"{run.solution.objective:>16.6e}"
            f"{run.cycling.hours:>10d}"
            f"{run.cycling.total_unintended_energy:>13.3e}"
            f"{curtailed:>13.3e}"
            f"{run.metrics.mu_policy:>8.1f}"
        )
