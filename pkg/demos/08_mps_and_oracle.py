"""Cross-checking the solver stack on a tiny instance.

Builds an 8-hour scenario, solves it three ways -- the embedded simplex, the
HiGHS backend, and an independently coded dense tableau oracle -- and dumps
the LP in MPS format for external solvers.
"""

import sys

import numpy as np

from usc_lab.formulation import build_lp
from usc_lab.harness import brute_force_oracle, solve_scenario
from usc_lab.lp import check_kkt, write_mps
from usc_lab.model import PolicySpec, Scenario, Storage, Technology

out = sys.argv[1] if len(sys.argv) > 1 else "out/tiny.mps"

rng = np.random.default_rng(11)
T = 8
tiny = Scenario(
    horizon=T,
    demand=rng.uniform(40, 90, T),
    technologies=(
        Technology("gas", "conventional", capacity_cost=250.0, variable_cost=45.0),
        Technology("sun", "renewable", capacity_cost=180.0, availability=rng.uniform(0.0, 1.0, T)),
    ),
    storages=(Storage("bat", 25.0, 25.0, 12.0, 0.5, 0.5, eta_in=0.9, eta_out=0.9),),
    policy=PolicySpec.renewable_share(1, "complete", 0.7),
)

embedded = solve_scenario(tiny, backend="embedded")
scipy_run = solve_scenario(tiny, backend="scipy")
oracle = brute_force_oracle(tiny)
print(f"embedded simplex: {embedded.solution.objective:.10e} ({embedded.solution.iterations} pivots)")
print(f"HiGHS backend:    {scipy_run.solution.objective:.10e}")
print(f"tableau oracle:   {oracle:.10e}")

report = check_kkt(embedded.problem, embedded.solution)
print(f"KKT residuals: stationarity {report.stationarity:.1e}, primal {report.primal_feas:.1e}, "
      f"dual {report.dual_feas:.1e}, compl. slack {report.comp_slack:.1e}")

problem, _ = build_lp(tiny)
text = write_mps(problem)
with open(out, "w") as fh:
    fh.write(text)
print(f"wrote {out} ({len(text.splitlines())} lines, fixed-format MPS)")
