"""Render the standard figure kinds from usc-lab result files.

Pure presentation: every number comes from the input CSV/JSON files.  Output
is a deterministic SVG or PNG per job (fixed styling, no timestamps).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "usc-figures"

import matplotlib.pyplot as plt
import numpy as np

from .data import (
    FigureDataError,
    flags,
    floats,
    prefixed,
    read_results,
    read_table,
    require_columns,
    split_by_flag,
)

KINDS = (
    "dispatch_week",
    "rldc",
    "price_violin",
    "sensitivity_panel",
    "capacity_bars",
    "energy_flow",
)

PALETTE = {
    "coal": "#4d4d4d",
    "ocgt": "#b2182b",
    "pv": "#fdb863",
    "wind": "#2166ac",
    "storage": "#66c2a5",
}


def _color(name: str, i: int) -> str:
    return PALETTE.get(name, plt.cm.tab10(i % 10))


@dataclass
class FigureJob:
    """One rendering task: a figure kind, its input files, an output path."""

    kind: str
    inputs: dict[str, str | Path]
    output: str | Path
    style: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise FigureDataError(f"unknown figure kind {self.kind!r}; known: {KINDS}")


def render(job: FigureJob) -> Path:
    """Render one job; returns the written image path."""
    fig = _RENDERERS[job.kind](job)
    out = Path(job.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, metadata=_clean_metadata(out))
    plt.close(fig)
    return out


def _clean_metadata(path: Path):
    if path.suffix == ".svg":
        return {"Date": None}
    return {}


def _dispatch_week(job: FigureJob):
    path = job.inputs["dispatch"]
    table = read_table(path)
    require_columns(table, ["t", "demand", "lambda"], path)
    t = floats(table, "t")
    start = int(job.style.get("start", 168))
    if start >= len(t):
        start = 0
    stop = min(start + int(job.style.get("hours", 168)), len(t))
    window = slice(start, stop)

    gen_cols = prefixed(table, "g_")
    out_cols = prefixed(table, "out_")
    in_cols = prefixed(table, "in_")
    if not gen_cols:
        raise FigureDataError(f"{path}: no generation columns (g_*)")

    fig, (ax, axp) = plt.subplots(
        2, 1, figsize=(10, 6), sharex=True, height_ratios=[3, 1], constrained_layout=True
    )
    hours = t[window]
    stack = [floats(table, c)[window] for c in gen_cols]
    stack += [floats(table, c)[window] for c in out_cols]
    labels = [c[2:] for c in gen_cols] + [c[4:] + " discharge" for c in out_cols]
    colors = [_color(lbl.split()[0], i) for i, lbl in enumerate(labels)]
    ax.stackplot(hours, stack, labels=labels, colors=colors, linewidth=0)
    charging = -sum(floats(table, c)[window] for c in in_cols) if in_cols else None
    if charging is not None:
        ax.fill_between(hours, charging, 0, color=PALETTE["storage"], alpha=0.5, label="charging")
    ax.plot(hours, floats(table, "demand")[window], color="black", lw=1.2, label="demand")
    ax.set_ylabel("MWh/h")
    ax.legend(loc="upper right", ncols=3, fontsize=8)
    ax.set_title("dispatch (charging on the negative axis)")

    axp.plot(hours, floats(table, "lambda")[window], color="#666666", lw=1.0)
    axp.set_ylabel("EUR/MWh")
    axp.set_xlabel("hour")
    return fig


def _rldc(job: FigureJob):
    path = job.inputs["rldc"]
    table = read_table(path)
    require_columns(table, ["rank", "raw", "after_curtailment", "after_storage"], path)
    fig, ax = plt.subplots(figsize=(8, 5), constrained_layout=True)
    rank = floats(table, "rank")
    for name, color in (
        ("raw", "#1b7837"),
        ("after_curtailment", "#762a83"),
        ("after_storage", "#2166ac"),
    ):
        ax.plot(rank, floats(table, name), label=name.replace("_", " "), color=color, lw=1.4)
    ax.axhline(0.0, color="black", lw=0.6)
    ax.set_xlabel("hours, sorted")
    ax.set_ylabel("residual load [MWh/h]")
    ax.legend()
    return fig


def _gaussian_kde(values: np.ndarray, grid: np.ndarray) -> np.ndarray:
    sd = values.std(ddof=1) if len(values) > 1 else 1.0
    bw = max(1.06 * sd * len(values) ** (-1 / 5), 1e-9 * (1 + abs(values).max()), 1e-12)
    z = (grid[:, None] - values[None, :]) / bw
    return np.exp(-0.5 * z * z).sum(axis=1) / (len(values) * bw * np.sqrt(2 * np.pi))


def _price_violin(job: FigureJob):
    path = job.inputs["dispatch"]
    table = read_table(path)
    require_columns(table, ["lambda", "cycling"], path)
    prices = floats(table, "lambda")
    cycling = flags(table, "cycling")
    quiet, busy = split_by_flag(prices, cycling)

    fig, ax = plt.subplots(figsize=(6, 6), constrained_layout=True)
    lo, hi = prices.min(), prices.max()
    pad = 0.05 * (hi - lo + 1.0)
    grid = np.linspace(lo - pad, hi + pad, 300)
    half_width = 0.38

    for side, values, color, label in (
        (-1, quiet, "#1f3d7a", "no simultaneous cycling"),
        (+1, busy, "#2aa198", "cycling hours"),
    ):
        if len(values) == 0:
            continue
        density = _gaussian_kde(values, grid)
        if density.max() > 0:
            density = density / density.max() * half_width
        ax.fill_betweenx(grid, side * density, 0, color=color, alpha=0.75, label=label)
        ax.scatter(
            np.full(len(values), side * 0.05), values, s=6, color=color, alpha=0.35, linewidths=0
        )
        ax.annotate(
            f"mean {values.mean():.1f}", (side * 0.55, hi + pad), ha="center", fontsize=9
        )
        ax.annotate(f"n={len(values)}", (side * 0.55, lo - pad), ha="center", fontsize=9)
    ax.axvline(0.0, color="black", lw=0.6)
    ax.set_xlim(-1.0, 1.0)
    ax.set_xticks([])
    ax.set_ylabel("price [EUR/MWh]")
    ax.legend(loc="upper left", fontsize=8)
    return fig


def _sensitivity_panel(job: FigureJob):
    path = job.inputs["sweep"]
    table = read_table(path)
    require_columns(table, ["axis", "value", "variant", "cycling_energy", "status"], path)
    axes_names = sorted(set(table["axis"]))
    fig, axs = plt.subplots(
        1, len(axes_names), figsize=(4.5* len(axes_names), 4), squeeze=False,
        constrained_layout=True,
    )
    values = floats(table, "value")
    energy = np.array(
        [float(v) if v not in ("", "nan") else np.nan for v in table["cycling_energy"]]
    )
    for k, axis_name in enumerate(axes_names):
        ax = axs[0][k]
        in_axis = [i for i, a in enumerate(table["axis"]) if a == axis_name]
        variants = sorted({table["variant"][i] for i in in_axis})
        for j, variant in enumerate(variants):
            rows = [i for i in in_axis if table["variant"][i] == variant]
            ax.plot(
                values[rows], energy[rows], marker="o", ms=4, label=variant,
                color=plt.cm.viridis(j / max(len(variants) - 1, 1)),
            )
        ax.set_xlabel(axis_name)
        ax.set_ylabel("unintended cycling energy [MWh]")
        ax.legend(fontsize=8)
    return fig


def _capacity_bars(job: FigureJob):
    paths = job.inputs["results"]
    if isinstance(paths, (str, Path)):
        paths = [paths]
    runs = [read_results(p) for p in paths]
    names: list[str] = []
    for payload in runs:
        for name in list(payload["capacities_mw"]) + [
            f"{sto}:{part}"
            for sto, parts in payload.get("storage_capacities", {}).items()
            for part in parts
        ]:
            if name not in names:
                names.append(name)
    fig, ax = plt.subplots(figsize=(1.5 + 1.1 * len(names), 4.5), constrained_layout=True)
    width = 0.8 / len(runs)
    for k, payload in enumerate(runs):
        caps = dict(payload["capacities_mw"])
        for sto, parts in payload.get("storage_capacities", {}).items():
            for part, value in parts.items():
                caps[f"{sto}:{part}"] = value
        label = payload.get("policy", {}).get("variant") or payload.get("policy", {}).get("kind")
        xs = np.arange(len(names)) + (k - (len(runs) - 1) / 2) * width
        ax.bar(xs, [caps.get(n, 0.0) / 1e3 for n in names], width=width, label=str(label))
    ax.set_xticks(np.arange(len(names)), names, rotation=30, ha="right")
    ax.set_ylabel("capacity [GW / GWh]")
    ax.legend(fontsize=8)
    return fig


def _energy_flow(job: FigureJob):
    from matplotlib.sankey import Sankey

    path = job.inputs["dispatch"]
    table = read_table(path)
    require_columns(table, ["demand"], path)
    gen = {c[2:]: floats(table, c).sum() for c in prefixed(table, "g_")}
    discharge = sum(floats(table, c).sum() for c in prefixed(table, "out_"))
    charge = sum(floats(table, c).sum() for c in prefixed(table, "in_"))
    curtailed = sum(floats(table, c).sum() for c in prefixed(table, "cu_"))
    demand = floats(table, "demand").sum()

    flows = [v for v in gen.values()] + [discharge, -demand, -charge]
    labels = [f"{n}\n{v/1e6:.2f} TWh" for n, v in gen.items()] + [
        f"discharge\n{discharge/1e6:.2f} TWh",
        f"demand\n{demand/1e6:.2f} TWh",
        f"charge\n{charge/1e6:.2f} TWh",
    ]
    orientations = [1] * len(gen) + [0, 0, -1]
    fig, ax = plt.subplots(figsize=(9, 6), constrained_layout=True)
    sankey = Sankey(ax=ax, scale=1.0 / max(demand, 1.0), offset=0.25, head_angle=120, gap=0.6)
    sankey.add(flows=flows, labels=labels, orientations=orientations, facecolor="#88a8c8")
    sankey.finish()
    ax.set_title(
        f"annual flows (losses {max(charge - discharge, 0.0)/1e6:.2f} TWh, "
        f"curtailment {curtailed/1e6:.2f} TWh)"
    )
    ax.axis("off")
    return fig


_RENDERERS = {
    "dispatch_week": _dispatch_week,
    "rldc": _rldc,
    "price_violin": _price_violin,
    "sensitivity_panel": _sensitivity_panel,
    "capacity_bars": _capacity_bars,
    "energy_flow": _energy_flow,
}
