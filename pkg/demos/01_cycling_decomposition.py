"""The four kinds of simultaneous-cycling hours, decomposed.

An hour in which a storage unit charges and discharges at the same time is
wasting energy on purpose.  This script walks through the canonical numbers
for each charge/discharge ratio at a 64% round-trip efficiency (0.8 each way).
"""

from usc_lab.analysis import decompose_cycling

CASES = [
    ("charging equals discharging", 10.0, 10.0),
    ("discharging exceeds charging", 4.0, 10.0),
    ("charging exceeds discharging, across-period share present", 10.0, 8.0),
    ("charging exceeds discharging, same-period only", 10.0, 4.0),
]

print(f"{'case':<55}{'type':>5}{'SPC':>9}{'APC':>9}{'losses':>9}{'total':>9}")
for label, charge, discharge in CASES:
    e = decompose_cycling(charge, discharge, eta_rt=0.64)
    print(
        f"{label:<55}{e.kind:>5}{e.spc:>9.3f}{e.apc:>9.3f}"
        f"{e.unintended_losses:>9.3f}{e.total_unintended:>9.3f}"
    )

print()
e = decompose_cycling(10.0, 10.0, eta_rt=0.64)
print(
    "An equal 10 MWh charge/discharge hour consumes "
    f"{e.total_unintended:.3f} MWh of storage throughput in total:\n"
    f"  {e.spc:.3f} MWh cycled within the hour (SPC),\n"
    f"  {e.apc:.3f} MWh stored in earlier hours (APC),\n"
    f"  {e.unintended_discharge:.3f} MWh discharged against it,\n"
    f"and removes {e.unintended_losses:.3f} MWh from the system as conversion losses."
)
