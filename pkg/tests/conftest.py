import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

import semifold as sf
from semifold.continuation import detect_fold, trace_branch
from semifold.nonlinear import make_system, newton_solve
from semifold.subsuper import build_subsolution
from semifold.verify import tau_star

settings.register_profile("suite", max_examples=25, derandomize=True,
                          deadline=None)
settings.load_profile("suite")

FIXDIR = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixture_data():
    return json.loads((FIXDIR / "canonical.json").read_text())


@pytest.fixture(scope="session")
def canonical():
    """The shared instance: N=3, P=(1+r^2)^-3, softplus ramp, R=40, n=4000."""
    return sf.canonical_instance()


@pytest.fixture(scope="session")
def coarse():
    return sf.canonical_instance(R=40.0, n=1000)


def make_branch(inst):
    ts = tau_star(inst)
    t0 = -10.0 * abs(ts)
    start = newton_solve(make_system(inst, t0), build_subsolution(inst, t0))
    return trace_branch(inst, t0, start.u, step_ds=0.5,
                        t_window=(t0 - 1.0, ts + 1.0))


@pytest.fixture(scope="session")
def canonical_branch(canonical):
    return make_branch(canonical)


@pytest.fixture(scope="session")
def canonical_fold(canonical, canonical_branch):
    return detect_fold(canonical_branch, canonical)


@pytest.fixture(scope="session")
def fixture_solutions(fixture_data):
    out = []
    for meta in fixture_data["solutions"]:
        arr = np.loadtxt(FIXDIR / meta["file"], delimiter=",", skiprows=1)
        out.append((float(meta["t"]), arr[:, 1]))
    return out
