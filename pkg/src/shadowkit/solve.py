"""Newton solvers for the discretized problem, and a time-relaxation oracle.

Two stationary solvers:

* ``newton`` works on the full coupled unknown (v, lambda) with the
  nonlocal constraint row; the bordered sparse Jacobian is factorized with
  SuperLU, and steps are damped by an Armijo backtracking line search with
  a hard guard keeping 1 + v > 1/2.
* ``solve_fixed_lambda`` freezes lambda and solves only the PDE rows; the
  Jacobian is tridiagonal and goes through a banded solve.

``relax_oracle`` is a deliberately unsophisticated forward-Euler march of
v_t = eps v'' + f(v, lambda) used as an independent check on the Newton
answers; it shares no linear algebra with them.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.linalg import solve_banded
from scipy.sparse import csc_matrix
from scipy.sparse.linalg import splu

from .discretize import Grid, State, laplacian, make_grid, residual
from .exceptions import Blowup, LeftDomain, NoConvergence, SingularJacobian
from .model import Params, deriv_bundle, reaction_f

__all__ = ["newton", "solve_fixed_lambda", "relax_oracle"]

# Minimum Armijo step before declaring failure; 2**-20 leaves room for very
# stiff transients without looping forever.
_MIN_STEP = 2.0**-20
_ARMIJO_SLOPE = 1e-4


def _bordered_csc(v: np.ndarray, lam: float, eps: float, P: Params, grid: Grid):
    """Sparse (n+2)^2 bordered Jacobian; same entries as discretize.jacobian."""
    n, h = grid.n, grid.h
    d = deriv_bundle(v, lam, P)
    w = grid.weights

    main = -2.0 * eps / h**2 + d.f_v
    upper = np.full(n, eps / h**2)
    lower = np.full(n, eps / h**2)
    upper[0] = 2.0 * eps / h**2
    lower[-1] = 2.0 * eps / h**2

    idx = np.arange(n + 1)
    rows = np.concatenate(
        [idx, idx[:-1], idx[1:], idx, np.full(n + 2, n + 1)]
    )
    cols = np.concatenate(
        [idx, idx[:-1] + 1, idx[1:] - 1, np.full(n + 1, n + 1), np.arange(n + 2)]
    )
    corner = w @ np.broadcast_to(d.g_lambda, (n + 1,))
    data = np.concatenate(
        [main, upper, lower, np.broadcast_to(d.f_lambda, (n + 1,)), w * d.g_v, [corner]]
    )
    return csc_matrix((data, (rows, cols)), shape=(n + 2, n + 2))


def _factorize(A):
    try:
        return splu(A)
    except RuntimeError as exc:  # SuperLU signals exact singularity this way
        raise SingularJacobian(str(exc)) from exc


def newton(
    init: State,
    eps: float,
    P: Params,
    tol: float = 1e-10,
    max_iter: int = 25,
    callback=None,
) -> State:
    """Damped Newton on the coupled unknown (v, lambda).

    Converges when the sup-norm of the full residual (PDE rows plus
    constraint row) drops to ``tol``.  An exact solution is returned
    unchanged without a single factorization.  ``callback(it, rnorm)``,
    if given, is invoked once per iterate including the initial one.

    Raises NoConvergence, SingularJacobian, or LeftDomain (when damping
    cannot keep 1 + v > 1/2).
    """
    grid = init.grid
    v = init.v.astype(float).copy()
    lam = float(init.lam)
    r = residual(State(v=v, lam=lam, grid=grid), eps, P)
    rnorm = float(np.max(np.abs(r)))

    for it in range(max_iter + 1):
        if callback is not None:
            callback(it, rnorm)
        if rnorm <= tol:
            return State(v=v, lam=lam, grid=grid)
        if it == max_iter:
            break

        lu = _factorize(_bordered_csc(v, lam, eps, P, grid))
        delta = lu.solve(-r)
        if not np.all(np.isfinite(delta)):
            raise SingularJacobian("non-finite Newton correction")

        step = 1.0
        accepted = False
        domain_only = True
        while step >= _MIN_STEP:
            v_try = v + step * delta[:-1]
            lam_try = lam + step * delta[-1]
            if np.min(1.0 + v_try) <= 0.5:
                step *= 0.5
                continue
            domain_only = False
            r_try = residual(State(v=v_try, lam=lam_try, grid=grid), eps, P)
            rnorm_try = float(np.max(np.abs(r_try)))
            if rnorm_try <= (1.0 - _ARMIJO_SLOPE * step) * rnorm:
                v, lam, r, rnorm = v_try, lam_try, r_try, rnorm_try
                accepted = True
                break
            step *= 0.5
        if not accepted:
            if domain_only:
                raise LeftDomain("could not keep 1 + v > 1/2 at any damped step")
            raise NoConvergence(
                f"line search stalled at iteration {it}, residual {rnorm:.3e}"
            )

    raise NoConvergence(f"residual {rnorm:.3e} > tol {tol:.1e} after {max_iter} iterations")


def _fixed_residual(v: np.ndarray, lam: float, eps: float, P: Params, h: float):
    return eps * laplacian(v, h) + reaction_f(v, lam, P)


def solve_fixed_lambda(
    init_v: np.ndarray,
    lam: float,
    eps: float,
    P: Params,
    tol: float = 1e-10,
    max_iter: int = 50,
) -> np.ndarray:
    """Damped Newton on the PDE rows alone, lambda frozen.

    Same damping and domain guard as the coupled solver; the linear solves
    are tridiagonal.  Returns the nodal values.
    """
    v = np.asarray(init_v, dtype=float).copy()
    n = v.size - 1
    grid = make_grid(n, P.L)
    h = grid.h
    r = _fixed_residual(v, lam, eps, P, h)
    rnorm = float(np.max(np.abs(r)))

    for it in range(max_iter + 1):
        if rnorm <= tol:
            return v
        if it == max_iter:
            break

        d = deriv_bundle(v, lam, P)
        ab = np.zeros((3, n + 1))
        ab[0, 1:] = eps / h**2
        ab[0, 1] = 2.0 * eps / h**2
        ab[1, :] = -2.0 * eps / h**2 + d.f_v
        ab[2, :-1] = eps / h**2
        ab[2, n - 1] = 2.0 * eps / h**2
        try:
            delta = solve_banded((1, 1), ab, -r)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(str(exc)) from exc
        if not np.all(np.isfinite(delta)):
            raise SingularJacobian("non-finite Newton correction")

        step = 1.0
        accepted = False
        domain_only = True
        while step >= _MIN_STEP:
            v_try = v + step * delta
            if np.min(1.0 + v_try) <= 0.5:
                step *= 0.5
                continue
            domain_only = False
            r_try = _fixed_residual(v_try, lam, eps, P, h)
            rnorm_try = float(np.max(np.abs(r_try)))
            if rnorm_try <= (1.0 - _ARMIJO_SLOPE * step) * rnorm:
                v, r, rnorm = v_try, r_try, rnorm_try
                accepted = True
                break
            step *= 0.5
        if not accepted:
            if domain_only:
                raise LeftDomain("could not keep 1 + v > 1/2 at any damped step")
            raise NoConvergence(
                f"line search stalled at iteration {it}, residual {rnorm:.3e}"
            )

    raise NoConvergence(f"residual {rnorm:.3e} > tol {tol:.1e} after {max_iter} iterations")


def relax_oracle(
    init_v: np.ndarray,
    lam: float,
    eps: float,
    P: Params,
    t_end: float = math.inf,
    vt_tol: float = 1e-10,
    max_steps: int = 5_000_000,
) -> np.ndarray:
    """Forward-Euler relaxation of v_t = eps v'' + f(v, lambda) at fixed lambda.

    Marches with dt = 0.9 h^2 / (2 eps) until the sup-norm of v_t falls to
    ``vt_tol`` (an equilibrium), or t reaches ``t_end`` (returns the state
    reached).  Raises Blowup past ten times the a-priori bound a2/c2, and
    NoConvergence if the step budget runs out first.
    """
    v = np.asarray(init_v, dtype=float).copy()
    n = v.size - 1
    h = P.L / n
    dt = 0.9 * h * h / (2.0 * eps)
    bound = 10.0 * P.a2 / P.c2
    t = 0.0
    for _ in range(max_steps):
        vt = eps * laplacian(v, h) + reaction_f(v, lam, P)
        if float(np.max(np.abs(vt))) <= vt_tol:
            return v
        if t >= t_end:
            return v
        v += dt * vt
        t += dt
        if float(np.max(np.abs(v))) > bound:
            raise Blowup(f"|v| exceeded {bound:g} during relaxation")
    raise NoConvergence(f"relaxation not stationary after {max_steps} steps")
