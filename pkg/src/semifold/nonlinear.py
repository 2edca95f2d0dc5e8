"""Nonlinear residual/Jacobian assembly, damped Newton, Picard solution
operator, and deflation for extra roots."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from .errors import NoConvergence, SingularOperator
from .grid import TridiagonalOperator, solve_tridiagonal
from .problem import ProblemInstance
from .subsuper import SolutionProfile, make_profile


@dataclass
class NonlinearSystem:
    instance: ProblemInstance
    A: TridiagonalOperator
    mP: np.ndarray
    g: Callable
    g_prime: Callable
    rhs_affine: np.ndarray  # P * (t*phi1 + f1)
    t: float

    @property
    def row_scale(self) -> float:
        return self.A.row_scale()


def make_system(instance: ProblemInstance, t: float) -> NonlinearSystem:
    nl = instance.nonlinearity
    phi1 = instance.eigen.phi1 if instance.eigen is not None else 0.0
    rhs = instance.weight_values * (t * phi1 + instance.forcing.f1)
    return NonlinearSystem(instance=instance, A=instance.A,
                           mP=instance.weight_values, g=nl.g,
                           g_prime=nl.g_prime, rhs_affine=rhs, t=float(t))


def residual(sys: NonlinearSystem, u: np.ndarray) -> np.ndarray:
    return sys.A.apply(u) - sys.mP * np.asarray(sys.g(u)) - sys.rhs_affine


def jacobian(sys: NonlinearSystem, u: np.ndarray) -> TridiagonalOperator:
    return sys.A.shifted(-sys.mP * np.asarray(sys.g_prime(u)))


def apply_solution_operator(sys: NonlinearSystem, v: np.ndarray) -> np.ndarray:
    """One Picard step: solve A u = P g(v) + P (t phi1 + f1)."""
    return solve_tridiagonal(sys.A, sys.mP * np.asarray(sys.g(v)) + sys.rhs_affine)


def newton_solve(sys: NonlinearSystem, u0: np.ndarray, tol: float = 1e-10,
                 maxit: int = 50, damping: bool = True) -> SolutionProfile:
    """Damped Newton with Armijo backtracking on the merit 0.5*||F||_2^2.
    Raises NoConvergence; callers probing nonexistence catch it."""
    u = np.asarray(u0, dtype=float).copy()
    rs = sys.row_scale
    F = residual(sys, u)
    for k in range(1, maxit + 1):
        if np.abs(F).max() <= tol * rs:
            return make_profile(sys.instance, u, sys.t, np.abs(F).max(),
                                iterations=k - 1)
        J = jacobian(sys, u)
        try:
            du = solve_tridiagonal(J, -F)
        except SingularOperator as exc:
            raise NoConvergence(f"singular Jacobian at step {k}: {exc}",
                                iterations=k, residual=float(np.abs(F).max()))
        merit = float(F @ F)
        step = 1.0
        for _ in range(30):
            u_try = u + step * du
            F_try = residual(sys, u_try)
            if not np.isfinite(F_try).all():
                step *= 0.5
                continue
            if not damping or float(F_try @ F_try) <= (1.0 - 1e-4 * step) * merit:
                break
            step *= 0.5
        else:
            raise NoConvergence(f"line search stagnated at step {k}",
                                iterations=k, residual=float(np.abs(F).max()))
        u, F = u_try, F_try
    raise NoConvergence(f"Newton: {maxit} iterations, residual "
                        f"{np.abs(F).max():.3e}", iterations=maxit,
                        residual=float(np.abs(F).max()))


def picard_solve(sys: NonlinearSystem, u0: np.ndarray, tol: float = 1e-10,
                 maxit: int = 2000) -> SolutionProfile:
    """Fixed-point iteration of the solution operator."""
    u = np.asarray(u0, dtype=float).copy()
    rs = sys.row_scale
    scale0 = 1.0 + np.abs(u).max()
    for k in range(1, maxit + 1):
        u_next = apply_solution_operator(sys, u)
        if not np.isfinite(u_next).all() or np.abs(u_next).max() > 1e8 * scale0:
            raise NoConvergence(f"Picard iteration diverged at step {k}",
                                iterations=k)
        delta = np.abs(u_next - u).max()
        u = u_next
        if delta <= tol * (1.0 + np.abs(u).max()):
            F = residual(sys, u)
            if np.abs(F).max() <= 1e2 * tol * rs:
                return make_profile(sys.instance, u, sys.t, np.abs(F).max(),
                                    iterations=k)
    raise NoConvergence(f"Picard: {maxit} iterations, last delta {delta:.3e}",
                        iterations=maxit, residual=float(delta))


def _deflation_factor(u: np.ndarray, known: List[SolutionProfile]):
    """Product of (1/||u-u_k||^2 + 1) and its gradient prefactors."""
    eta = 1.0
    grads = []
    for prof in known:
        d = u - prof.u
        n2 = float(d @ d)
        if n2 < 1e-300:
            return 1e300, None  # sitting on a known root: hard penalty
        eta *= 1.0 / n2 + 1.0
        # d/du of log(1/n2 + 1) = -2 d / (n2 * (1 + n2))
        grads.append(-2.0 * d / (n2 * (1.0 + n2)))
    return eta, np.sum(grads, axis=0) if grads else np.zeros_like(u)


def deflated_solve(sys: NonlinearSystem, known: List[SolutionProfile],
                   u0: np.ndarray, tol: float = 1e-10,
                   maxit: int = 200) -> SolutionProfile:
    """Newton on the deflated residual eta(u) F(u).  The deflated step is
    a scalar rescaling of the plain Newton step, so the tridiagonal solve
    is reused unchanged."""
    if not known:
        raise ValueError("deflated_solve requires at least one known solution")
    u = np.asarray(u0, dtype=float).copy()
    rs = sys.row_scale
    for k in range(1, maxit + 1):
        F = residual(sys, u)
        eta, grad_log_eta = _deflation_factor(u, known)
        if np.abs(F).max() <= tol * rs and grad_log_eta is not None:
            sep_ok = all(np.abs(u - p.u).max() >= 1e-4 * (1.0 + np.abs(p.u).max())
                         for p in known)
            if sep_ok:
                return make_profile(sys.instance, u, sys.t, np.abs(F).max(),
                                    iterations=k - 1)
        J = jacobian(sys, u)
        try:
            du_newton = solve_tridiagonal(J, -F)
        except SingularOperator as exc:
            raise NoConvergence(f"singular Jacobian at step {k}: {exc}",
                                iterations=k)
        if grad_log_eta is None:
            # perched exactly on a known root: nudge off along the grid
            u = u + 1e-3 * (1.0 + np.abs(u).max())
            continue
        # Newton step for eta*F: scale du by 1/(1 - grad(log eta).du)
        denom = 1.0 - float(grad_log_eta @ du_newton)
        if abs(denom) < 1e-12:
            denom = np.sign(denom) * 1e-12 if denom != 0.0 else 1e-12
        du = du_newton / denom
        merit = eta ** 2 * float(F @ F)
        step = 1.0
        for _ in range(40):
            u_try = u + step * du
            F_try = residual(sys, u_try)
            eta_try, _ = _deflation_factor(u_try, known)
            if np.isfinite(F_try).all() and \
                    eta_try ** 2 * float(F_try @ F_try) <= (1.0 - 1e-4 * step) * merit:
                break
            step *= 0.5
        else:
            raise NoConvergence(f"deflated line search stagnated at step {k}",
                                iterations=k, residual=float(np.abs(F).max()))
        u = u_try
    raise NoConvergence(f"deflated Newton: {maxit} iterations", iterations=maxit)


def second_solution(sys: NonlinearSystem, known: SolutionProfile,
                    perturbations=(0.2, 0.5, 1.0, 2.0, 4.0),
                    tol: float = 1e-10) -> SolutionProfile:
    """Deflate a known solution and search for another one, retrying with
    larger starting perturbations along the first eigenfunction (the
    direction in which the second branch separates)."""
    phi = sys.instance.eigen.phi1
    direction = phi / np.abs(phi).max()
    last = None
    for eps in perturbations:
        try:
            return deflated_solve(sys, [known], known.u + eps * direction,
                                  tol=tol)
        except NoConvergence as exc:
            last = exc
    raise NoConvergence(f"no second solution found: {last}")
