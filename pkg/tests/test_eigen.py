import numpy as np
import pytest

import semifold as sf
from semifold.eigen import (decay_constants, rayleigh_quotient,
                            second_eigenvalue, smallest_eigenvalue)
from semifold.errors import ZeroDenominator


def test_dirichlet_ball_oracle():
    """Unit weight on a ball of radius pi: lambda1 = 1, phi1 = sin(r)/r."""
    grid = sf.build_grid(3, np.pi, 2000)
    A = sf.assemble_laplacian(grid, "dirichlet")
    eig = sf.first_eigenpair(grid, A, np.ones(grid.n))
    assert eig.lambda1 == pytest.approx(1.0, abs=1e-4)
    exact = np.ones(grid.n)
    exact[1:] = np.sin(grid.nodes[1:]) / grid.nodes[1:]
    scale = eig.phi1[0] / exact[0]
    assert np.abs(eig.phi1 - scale * exact).max() < 1e-4 * abs(scale)


def test_canonical_eigenvalue_matches_oracle_fixture(canonical, fixture_data):
    lam = fixture_data["lambda_star"]
    assert abs(canonical.eigen.lambda1 - lam["value"]) <= lam["error_bar"]


def test_eigenfunction_positive_and_normalized(canonical):
    eig = canonical.eigen
    assert (eig.phi1 > 0).all()
    assert eig.normalization_residual < 1e-12
    norm = sf.weighted_integral(canonical.grid,
                                canonical.weight_values * eig.phi1 ** 2)
    assert norm == pytest.approx(1.0, abs=1e-12)


def test_decay_plateau(canonical):
    dec = decay_constants(canonical.grid, canonical.eigen.phi1)
    assert dec.plateau_ok
    assert dec.C2 / dec.C1 <= 1.05
    assert dec.C1 > 0


def test_dirichlet_tail_has_no_plateau():
    """With a hard wall the scaled eigenfunction dives to zero at R, so
    the plateau flag must come back false."""
    inst = sf.canonical_instance(R=40.0, n=1000, farfield="dirichlet")
    assert not inst.eigen.plateau_ok


def test_second_eigenvalue_above_first(coarse):
    lam2 = second_eigenvalue(coarse.grid, coarse.A, coarse.weight_values,
                             coarse.eigen)
    assert lam2 > coarse.eigen.lambda1 * 1.5


def test_rayleigh_quotient_bounds_lambda1(coarse):
    grid = coarse.grid
    lam1 = coarse.eigen.lambda1
    assert rayleigh_quotient(grid, coarse.A, coarse.weight_values,
                             coarse.eigen.phi1) == pytest.approx(lam1, rel=1e-9)
    trial = np.exp(-grid.nodes)
    assert rayleigh_quotient(grid, coarse.A, coarse.weight_values,
                             trial) >= lam1
    with pytest.raises(ZeroDenominator):
        rayleigh_quotient(grid, coarse.A, coarse.weight_values,
                          np.zeros(grid.n))


def test_smallest_eigenvalue_sign_tracks_shift(coarse):
    lam1 = coarse.eigen.lambda1
    below = coarse.A.shifted(-0.9 * lam1 * coarse.weight_values)
    above = coarse.A.shifted(-1.1 * lam1 * coarse.weight_values)
    assert smallest_eigenvalue(coarse.grid, below) > 0
    assert smallest_eigenvalue(coarse.grid, above) < 0


def test_eigenvalue_second_order_in_h():
    vals = {}
    for n in (500, 1000, 2000):
        grid = sf.build_grid(3, np.pi, n)
        A = sf.assemble_laplacian(grid, "dirichlet")
        vals[n] = sf.first_eigenpair(grid, A, np.ones(grid.n)).lambda1
    ratio = (vals[500] - vals[1000]) / (vals[1000] - vals[2000])
    assert 3.5 <= ratio <= 4.5
