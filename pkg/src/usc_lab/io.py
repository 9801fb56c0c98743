"""Configuration parsing and result serialization.

Config files are INI-style with sections [scenario], [technology.NAME],
[storage.NAME], [policy], and [solver]; omitted sections fall back to the
bundled default parameterization.  Results go to results.json plus
dispatch/rldc/cycling/sweep CSVs; every file carries a schema_version field
and numbers are serialized with 12 significant digits.
"""

from __future__ import annotations

import configparser
import csv
import dataclasses
import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import analysis, model
from .harness import RunResult, SweepRow
from .model import PolicySpec, Scenario, Storage, Technology

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """A malformed config or data file, with file/key context in the message."""


@dataclass
class RunConfig:
    """Run-level knobs that are not part of the scenario itself."""

    seed: int = 42
    backend: Optional[str] = None
    feas_tol: float = 1e-7
    opt_tol: float = 1e-8
    output_dir: Path = Path("out")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


# -- config -------------------------------------------------------------------


def read_series_csv(path: Path, column: str) -> np.ndarray:
    """One named column from a CSV (comment lines starting with # ignored)."""
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(line for line in fh if not line.startswith("#"))
            header = next(reader)
            if column not in header:
                raise ConfigError(f"{path}: no column named {column!r} (have {header})")
            k = header.index(column)
            values = []
            for ln, row in enumerate(reader, start=2):
                try:
                    values.append(float(row[k]))
                except (ValueError, IndexError) as exc:
                    raise ConfigError(f"{path}:{ln}: bad value in column {column!r}") from exc
    except FileNotFoundError as exc:
        raise ConfigError(f"series file not found: {path}") from exc
    return np.asarray(values)


def _availability(spec: str, horizon: int, seed: int, base_dir: Path) -> Optional[np.ndarray]:
    if spec in ("firm", "const", ""):
        return None
    if spec in ("pv", "wind"):
        return model.synth_profiles(seed, horizon)[spec]
    if spec.startswith("csv:"):
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError(f"availability spec {spec!r} must be csv:FILE:COLUMN")
        return read_series_csv(base_dir / parts[1], parts[2])
    raise ConfigError(f"unknown availability spec {spec!r}")


def load_config(path: Optional[str | Path]) -> tuple[Scenario, RunConfig]:
    """Parse a config file into a validated Scenario plus run settings.

    With no path, the bundled default scenario is returned.  Validation
    failures raise ConfigError listing every violation.
    """
    if path is None:
        scenario = model.default_scenario()
        return scenario, RunConfig()

    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser()
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    base_dir = path.parent
    sc = cp["scenario"] if cp.has_section("scenario") else {}
    horizon = int(sc.get("horizon", 672))
    seed = int(sc.get("seed", 42))
    rate = float(sc.get("rate", model.DEFAULT_RATE))
    wrap = str(sc.get("wrap_storage_level", "true")).lower() in ("1", "true", "yes")

    if "demand_csv" in sc:
        demand = read_series_csv(base_dir / sc["demand_csv"], sc.get("demand_column", "demand"))
    else:
        demand = model.default_demand(horizon, float(sc.get("annual_demand_twh", 520.0)) * 1e6)

    tech_sections = [s for s in cp.sections() if s.startswith("technology.")]
    sto_sections = [s for s in cp.sections() if s.startswith("storage.")]

    if tech_sections:
        technologies = []
        for section in tech_sections:
            name = section.split(".", 1)[1]
            raw = cp[section]
            kind = raw.get("class", model.CONVENTIONAL)
            if "capacity_cost" in raw:
                capacity_cost = float(raw["capacity_cost"])
            else:
                try:
                    capacity_cost = model.annualize(
                        float(raw.get("overnight_cost", 0.0)),
                        float(raw.get("lifetime", 25)),
                        float(raw.get("rate", rate)),
                        float(raw.get("fixed_om", 0.0)),
                    )
                except ValueError as exc:
                    raise ConfigError(f"{path} [{section}]: {exc}") from exc
            technologies.append(
                Technology(
                    name=name,
                    kind=kind,
                    capacity_cost=capacity_cost,
                    variable_cost=float(raw.get("variable_cost", 0.0)),
                    availability=_availability(
                        raw.get("availability", "pv" if kind == model.RENEWABLE and name == "pv" else
                                "wind" if kind == model.RENEWABLE else "firm"),
                        horizon, seed, base_dir),
                    curtailment_cost=float(raw.get("curtailment_cost", 0.0)),
                    emission_factor=float(raw.get("emission_factor", 0.0)),
                )
            )
        technologies = tuple(technologies)
    else:
        technologies = model.default_technologies(horizon, seed=seed, rate=rate)

    if sto_sections:
        storages = []
        for section in sto_sections:
            name = section.split(".", 1)[1]
            raw = cp[section]
            if "energy_cost" in raw:
                energy_cost = float(raw["energy_cost"])
            else:
                energy_cost = model.annualize(
                    float(raw.get("energy_overnight", 80.0)),
                    float(raw.get("energy_lifetime", 50)),
                    float(raw.get("rate", rate)),
                )
            if "roundtrip" in raw:
                eta_in = eta_out = float(np.sqrt(float(raw["roundtrip"])))
            else:
                eta_in = float(raw.get("eta_in", 1.0))
                eta_out = float(raw.get("eta_out", 1.0))
            storages.append(
                Storage(
                    name=name,
                    charge_cost=float(raw.get("charge_cost", 1100.0)),
                    discharge_cost=float(raw.get("discharge_cost", 1100.0)),
                    energy_cost=energy_cost,
                    var_charge_cost=float(raw.get("var_charge_cost", 0.5)),
                    var_discharge_cost=float(raw.get("var_discharge_cost", 0.5)),
                    eta_in=eta_in,
                    eta_out=eta_out,
                    self_discharge=float(raw.get("self_discharge", 1.0)),
                )
            )
        storages = tuple(storages)
    elif cp.has_option("scenario", "no_storage") and cp.getboolean("scenario", "no_storage"):
        storages = ()
    else:
        storages = (model.default_storage(rate),)

    policy = _parse_policy(cp["policy"] if cp.has_section("policy") else {})

    scenario = Scenario(
        horizon=horizon,
        demand=demand,
        technologies=technologies,
        storages=storages,
        policy=policy,
        wrap_storage_level=wrap,
    )
    violations = model.validate_scenario(scenario)
    if violations:
        raise ConfigError(f"{path}: invalid scenario: " + "; ".join(str(v) for v in violations))

    sv = cp["solver"] if cp.has_section("solver") else {}
    run = RunConfig(
        seed=seed,
        backend=sv.get("backend") or None,
        feas_tol=float(sv.get("feas_tol", 1e-7)),
        opt_tol=float(sv.get("opt_tol", 1e-8)),
        output_dir=Path(sc.get("output_dir", "out")) if hasattr(sc, "get") else Path("out"),
    )
    return scenario, run


def _parse_policy(raw) -> PolicySpec:
    kind = raw.get("kind", "none")
    if kind == "none":
        return PolicySpec.none()
    if kind == "renewable_share":
        return PolicySpec.renewable_share(
            int(raw.get("family", 1)), raw.get("slcr", "complete"), float(raw.get("phi", 0.8))
        )
    if kind == "potential_share":
        return PolicySpec.potential_share(float(raw.get("phi", 0.8)))
    if kind == "capacity_target":
        targets = {}
        for pair in raw.get("targets", "").split(","):
            if pair.strip():
                name, _, value = pair.partition("=")
                targets[name.strip()] = float(value)
        return PolicySpec.capacity_target(targets)
    if kind == "carbon_cap":
        return PolicySpec.carbon_cap(float(raw.get("cap", "inf")))
    if kind == "carbon_price":
        return PolicySpec.carbon_price(float(raw.get("price", 0.0)))
    return PolicySpec(kind=kind)


# -- result files ---------------------------------------------------------------


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema_version={SCHEMA_VERSION}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    """Read one of our CSVs back: (header, raw string rows), comments skipped."""
    with open(path, newline="") as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        header = next(reader)
        return header, [row for row in reader]


def write_results(run: RunResult, out_dir: str | Path, timestamp: Optional[str] = None) -> dict[str, Path]:
    """Serialize one solved run: results.json, dispatch.csv, rldc.csv, cycling.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files: dict[str, Path] = {}

    s = run.scenario
    sol = run.solution
    layout = run.layout
    summary = {
        "schema_version": SCHEMA_VERSION,
        "timestamp": timestamp if timestamp is not None else time.strftime("%Y-%m-%dT%H:%M:%S"),
        "status": sol.status,
        "backend": sol.backend,
        "policy": {
            "kind": s.policy.kind,
            "variant": s.policy.variant,
            "phi": s.policy.phi,
            "cap": s.policy.cap,
            "price": s.policy.price,
        },
        "horizon": s.horizon,
    }
    if sol.status == "optimal":
        m = run.metrics
        summary.update(
            {
                "objective": _num(sol.objective),
                "capacities_mw": {t.name: _num(layout.capacity(sol, t.name)) for t in s.technologies},
                "storage_capacities": {
                    r.name: {part: _num(layout.storage_capacity(sol, r.name, part)) for part in ("in", "out", "level")}
                    for r in s.storages
                },
                "reported_shares": {k: _num(v) for k, v in m.reported_shares.items()},
                "emissions_tco2": _num(m.emissions),
                "mu_policy": _num(m.mu_policy),
                "lcos": {k: _num(v) for k, v in m.lcos.items()},
                "market_value": {k: _num(v) for k, v in m.mv.items()},
                "nsl": {k: _num(v) for k, v in m.nsl.items()},
                "zero_profit_residual": {k: _num(v) for k, v in m.zero_profit_residual.items()},
                "cycling": {
                    "hours": run.cycling.hours,
                    "events": len(run.cycling.events),
                    "spc_total": _num(run.cycling.spc_total),
                    "apc_total": _num(run.cycling.apc_total),
                    "unintended_losses_total": _num(run.cycling.unintended_losses_total),
                    "total_unintended_energy": _num(run.cycling.total_unintended_energy),
                },
            }
        )
    files["results"] = out / "results.json"
    with open(files["results"], "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")

    if sol.status != "optimal":
        return files

    T = s.horizon
    lam = layout.prices(sol)
    flags = run.cycling.hour_flags
    header = ["t", "demand"]
    header += [f"g_{t.name}" for t in s.technologies]
    header += [f"cu_{t.name}" for t in s.renewables]
    for r in s.storages:
        header += [f"in_{r.name}", f"out_{r.name}", f"level_{r.name}"]
    header += ["lambda", "cycling"]
    rows = []
    for t in range(T):
        row = [t, s.demand[t]]
        row += [layout.generation(sol, tech.name)[t] for tech in s.technologies]
        row += [layout.curtailment(sol, tech.name)[t] for tech in s.renewables]
        for r in s.storages:
            row += [
                layout.charge(sol, r.name)[t],
                layout.discharge(sol, r.name)[t],
                layout.level(sol, r.name)[t],
            ]
        row += [lam[t], bool(flags[t])]
        rows.append(row)
    files["dispatch"] = out / "dispatch.csv"
    _write_csv(files["dispatch"], header, rows)

    curves = run.metrics.rldc
    files["rldc"] = out / "rldc.csv"
    _write_csv(
        files["rldc"],
        ["rank", "raw", "after_curtailment", "after_storage"],
        [
            [i, curves.raw[i], curves.after_curtailment[i], curves.after_storage[i]]
            for i in range(T)
        ],
    )

    files["cycling"] = out / "cycling.csv"
    _write_csv(
        files["cycling"],
        [
            "t", "storage", "charge", "discharge", "type", "spc", "apc",
            "unintended_discharge", "unintended_losses", "intended_charge",
            "intended_discharge",
        ],
        [
            [
                e.hour, e.storage, e.charge, e.discharge, e.kind, e.spc, e.apc,
                e.unintended_discharge, e.unintended_losses, e.intended_charge,
                e.intended_discharge,
            ]
            for e in run.cycling.events
        ],
    )
    return files


def _num(v):
    if v is None:
        return None
    return float(format(float(v), ".12g"))


def write_sweep(rows: list[SweepRow], out_dir: str | Path) -> Path:
    """Serialize sweep rows; capacity columns take the union over rows."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cap_names: list[str] = []
    sto_names: list[str] = []
    for r in rows:
        for n in r.capacities:
            if n not in cap_names:
                cap_names.append(n)
        for n in r.storage_capacities:
            if n not in sto_names:
                sto_names.append(n)
    header = ["axis", "value", "variant", "family", "slcr", "status", "objective",
              "cycling_energy", "cycling_hours", "emissions", "indeterminate"]
    header += [f"cap_{n}" for n in cap_names] + [f"cap_{n}" for n in sto_names]
    table = []
    for r in rows:
        row = [r.axis, r.value, r.variant, r.family, r.slcr, r.status, r.objective,
               r.cycling_energy, r.cycling_hours, r.emissions, r.indeterminate]
        row += [r.capacities.get(n) for n in cap_names]
        row += [r.storage_capacities.get(n) for n in sto_names]
        table.append(row)
    path = out / "sweep.csv"
    _write_csv(path, header, table)
    return path


def write_profiles(seed: int, horizon: int, path: str | Path) -> Path:
    profiles = model.synth_profiles(seed, horizon)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    _write_csv(
        path,
        ["t", "pv", "wind"],
        [[t, profiles["pv"][t], profiles["wind"][t]] for t in range(horizon)],
    )
    return path
