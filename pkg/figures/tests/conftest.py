"""Fixtures: produce real result files through the usc-lab CLI.

The plotting package consumes the solver package only through its file
formats, so the fixtures shell out to the installed ``usc-lab`` entry point.
"""

import subprocess

import pytest


def run_cli(*args) -> None:
    proc = subprocess.run(["usc-lab", *args], capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"usc-lab {' '.join(args)} failed with {proc.returncode}:\n{proc.stderr}")


@pytest.fixture(scope="session")
def default_run(tmp_path_factory):
    """The default desk-scale run, solved once per test session."""
    out = tmp_path_factory.mktemp("default_run")
    run_cli(
        "solve", "--family", "1", "--slcr", "proportionate", "--phi", "0.8",
        "--backend", "scipy", "--out", str(out),
    )
    return out


@pytest.fixture(scope="session")
def complete_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("complete_run")
    run_cli(
        "solve", "--family", "1", "--slcr", "complete", "--phi", "0.8",
        "--backend", "scipy", "--out", str(out),
    )
    return out


@pytest.fixture(scope="session")
def sweep_csv(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep")
    run_cli(
        "sweep", "--axis", "phi", "--grid", "0.5,0.7,0.9", "--variants", "1a,1c",
        "--backend", "scipy", "--out", str(out),
    )
    return out / "sweep.csv"
