"""Solve the bundled desk-scale scenario once and write all result files.

The default system is a stylized one-region power sector (coal, OCGT, PV,
wind, one pumped-hydro-like storage unit) over four weeks, under a minimum
renewable share of 80% of demand with proportionate loss coverage -- the
constraint shape that cycles the most.
"""

import sys

from usc_lab.harness import solve_scenario
from usc_lab.io import write_results
from usc_lab.model import PolicySpec, default_scenario

out_dir = sys.argv[1] if len(sys.argv) > 1 else "out/single_run"

scenario = default_scenario(policy=PolicySpec.renewable_share(1, "proportionate", 0.8))
run = solve_scenario(scenario, backend="scipy")
print(f"status: {run.status}, objective {run.solution.objective:.6e} EUR")

m = run.metrics
print(f"cycling hours: {run.cycling.hours}  (unintended energy {run.cycling.total_unintended_energy:.3e} MWh)")
print(f"policy shadow price: {m.mu_policy:.2f} EUR/MWh")
print("capacities [GW]:", {t.name: round(run.layout.capacity(run.solution, t.name) / 1e3, 1)
                           for t in scenario.technologies})
print("reported shares:", {k: round(v, 4) for k, v in m.reported_shares.items()})
print(f"storage LCOS {m.lcos['storage']:.2f}, market value {m.mv['storage']:.2f} EUR/MWh, "
      f"zero-profit residual {m.zero_profit_residual['storage']:.2e}")

files = write_results(run, out_dir)
print("wrote:", ", ".join(str(p) for p in files.values()))
