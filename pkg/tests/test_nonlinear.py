import numpy as np
import pytest

import semifold as sf
from semifold.errors import NoConvergence
from semifold.nonlinear import (apply_solution_operator, deflated_solve,
                                jacobian, make_system, newton_solve,
                                picard_solve, residual, second_solution)
from semifold.subsuper import build_subsolution


@pytest.fixture(scope="module")
def inst():
    return sf.canonical_instance(R=40.0, n=1000)


@pytest.fixture(scope="module")
def minimal(inst):
    sys = make_system(inst, -50.0)
    return newton_solve(sys, build_subsolution(inst, -50.0))


def test_jacobian_consistency(inst):
    """Directional finite differences of the residual match J within
    second-order error in the step."""
    sys = make_system(inst, -50.0)
    rng = np.random.default_rng(11)
    u = build_subsolution(inst, -50.0)
    for _ in range(5):
        d = rng.standard_normal(inst.grid.n)
        d /= np.abs(d).max()
        eps = 1e-6
        fd = (residual(sys, u + eps * d) - residual(sys, u - eps * d)) / (2 * eps)
        jd = jacobian(sys, u).apply(d)
        assert np.abs(fd - jd).max() < 1e-6 * inst.A.row_scale()


def test_newton_exact_on_linear_problem():
    from dataclasses import replace

    base = sf.canonical_instance(R=20.0, n=500)
    nl = sf.linear_nonlinearity(0.5 * base.eigen.lambda1)
    inst = replace(base, nonlinearity=nl)
    sys = make_system(inst, 1.0)
    prof = newton_solve(sys, np.zeros(inst.grid.n))
    assert prof.iterations <= 1
    assert prof.residual_inf <= 1e-10 * inst.A.row_scale()


def test_picard_matches_newton(inst, minimal):
    sys = make_system(inst, -50.0)
    pic = picard_solve(sys, build_subsolution(inst, -50.0))
    assert np.abs(pic.u - minimal.u).max() < 1e-6 * (1.0 + np.abs(minimal.u).max())


def test_solution_operator_fixed_point(inst, minimal):
    sys = make_system(inst, -50.0)
    once = apply_solution_operator(sys, minimal.u)
    assert np.abs(once - minimal.u).max() < 1e-8 * (1.0 + np.abs(minimal.u).max())


def test_solution_operator_is_monotone(inst):
    """v1 <= v2 implies K v1 <= K v2 (monotone g + inverse positivity)."""
    sys = make_system(inst, -50.0)
    rng = np.random.default_rng(5)
    for _ in range(10):
        v1 = rng.standard_normal(inst.grid.n)
        v2 = v1 + rng.random(inst.grid.n)
        assert (apply_solution_operator(sys, v1)
                <= apply_solution_operator(sys, v2) + 1e-12).all()


def test_newton_diverges_without_solution(inst, fixture_data):
    t_bad = fixture_data["tau_star_canonical"] + 2.0
    sys = make_system(inst, t_bad)
    with pytest.raises(NoConvergence):
        newton_solve(sys, np.zeros(inst.grid.n))


def test_deflation_finds_distinct_root(inst, minimal):
    sys = make_system(inst, -50.0)
    # -50 is far below the fold; the second solution is well separated
    sec = second_solution(sys, minimal)
    assert sec.residual_inf <= 1e-8 * inst.A.row_scale()
    sep = np.abs(sec.u - minimal.u).max()
    assert sep > 1e-3 * (1.0 + np.abs(minimal.u).max())


def test_deflated_solve_requires_known_roots(inst, minimal):
    sys = make_system(inst, -50.0)
    with pytest.raises(ValueError):
        deflated_solve(sys, [], minimal.u)


def test_residual_scaling_invariance(inst, minimal):
    """The residual of a converged solution stays small relative to the
    operator's row scale across grid resolutions."""
    for n in (500, 2000):
        fine = sf.canonical_instance(R=40.0, n=n)
        sys = make_system(fine, -50.0)
        prof = newton_solve(sys, build_subsolution(fine, -50.0))
        assert prof.residual_inf <= 1e-10 * fine.A.row_scale()
