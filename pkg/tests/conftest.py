"""Shared, session-scoped simulation fixtures.

The full-resolution runs (n = 401, dt = 2.5e-5, t_end = 2) take several
seconds each, so every test module reuses the same artifacts.
"""
from pathlib import Path

import pytest

from burgers_iss import backstepping as bs
from burgers_iss.config import load_config
from burgers_iss.numerics import Grid1D
from burgers_iss.runner import run_scenario

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"
TEST_CONFIGS = Path(__file__).resolve().parent / "configs"


def _run(name):
    return run_scenario(load_config(CONFIGS / f"{name}.cfg"))


@pytest.fixture(scope="session")
def canonical_run():
    return _run("canonical_burgers")


@pytest.fixture(scope="session")
def split_a_run():
    return _run("splitting_a")


@pytest.fixture(scope="session")
def split_b_run():
    return _run("splitting_b")


@pytest.fixture(scope="session")
def closed_loop_run():
    return _run("closed_loop")


@pytest.fixture(scope="session")
def open_loop_run():
    return _run("open_loop")


@pytest.fixture(scope="session")
def target_split_run():
    return _run("target_split")


@pytest.fixture(scope="session")
def rd_params():
    return bs.ReactionDiffusionParams(mu=1.0, nu=1.0, a0=-10.0)


@pytest.fixture(scope="session")
def grid201():
    return Grid1D(201)


@pytest.fixture(scope="session")
def kernels201(rd_params, grid201):
    """Successive-approximation kernels k, l for a0 = -10 on 201 nodes."""
    return bs.solve_kernel(rd_params, grid201), bs.solve_inverse_kernel(rd_params, grid201)
