"""Pseudo-arclength continuation of nontrivial branches in eps, plus a
determinant-based sweep that locates the bifurcation points themselves.

The continuation unknown is U = (v, lambda, eps) with the metric

    |dU|^2 = (1/L) int dv^2 dx + dlambda^2 + deps^2,

so arclength steps weigh the profile and the two scalars comparably.
Branches are seeded at a bifurcation point of the constant state with the
exact kernel tangent (cos mode); stepping halves on corrector failure and
relaxes back up after a run of easy steps.  Folds, loss of positivity and
corrector exhaustion are recorded as named events on the branch.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded
from scipy.sparse import csc_matrix
from scipy.sparse.linalg import splu

from .analytic import bifurcation_eps
from .discretize import Grid, State, amplitude, laplacian, make_grid, residual
from .eigen import stability_spectrum
from .exceptions import (
    InsufficientData,
    LeftDomain,
    NoConvergence,
    SeedFailure,
    SingularJacobian,
)
from .model import Params, constant_state, deriv_bundle

__all__ = [
    "BranchPoint",
    "Branch",
    "branch_from_bifurcation",
    "extend_to_small_eps",
    "detect_bifurcations",
    "fit_pitchfork",
    "merge_halves",
    "branch_table",
]

_STABLE_MARGIN = 1e-8
_POSITIVITY_FLOOR = 1e-3


@dataclass
class BranchPoint:
    s: float
    eps: float
    lam: float
    state: State
    leading_eig: float
    stable: bool


@dataclass
class Branch:
    k: int
    points: list[BranchPoint]
    origin_eps: float
    P: Params
    grid: Grid
    events: list[str] = field(default_factory=list)
    monotone_fraction: float | None = None


# --- metric helpers ----------------------------------------------------------


def _ip(grid: Grid, dv1, dlam1, deps1, dv2, dlam2, deps2) -> float:
    return float(
        (grid.weights @ (dv1 * dv2)) / grid.L + dlam1 * dlam2 + deps1 * deps2
    )


def _norm(grid: Grid, dv, dlam, deps) -> float:
    return math.sqrt(_ip(grid, dv, dlam, deps, dv, dlam, deps))


# --- extended linear algebra --------------------------------------------------


def _extended_csc(v, lam, eps, P: Params, grid: Grid, tau):
    """(n+3)^2 sparse matrix: PDE rows, constraint row, arclength row.

    Columns are (v_0..v_n, lambda, eps); the last row is the metric gradient
    of the arclength condition along the tangent tau = (tv, tlam, teps).
    """
    n, h = grid.n, grid.h
    d = deriv_bundle(v, lam, P)
    w = grid.weights
    tv, tlam, teps = tau

    main = -2.0 * eps / h**2 + d.f_v
    upper = np.full(n, eps / h**2)
    lower = np.full(n, eps / h**2)
    upper[0] = 2.0 * eps / h**2
    lower[-1] = 2.0 * eps / h**2

    idx = np.arange(n + 1)
    rows = np.concatenate(
        [
            idx,
            idx[:-1],
            idx[1:],
            idx,                       # d(PDE)/d(lambda)
            idx,                       # d(PDE)/d(eps)
            np.full(n + 2, n + 1),     # constraint row
            np.full(n + 3, n + 2),     # arclength row
        ]
    )
    cols = np.concatenate(
        [
            idx,
            idx[:-1] + 1,
            idx[1:] - 1,
            np.full(n + 1, n + 1),
            np.full(n + 1, n + 2),
            np.arange(n + 2),
            np.arange(n + 3),
        ]
    )
    corner = w @ np.broadcast_to(d.g_lambda, (n + 1,))
    data = np.concatenate(
        [
            main,
            upper,
            lower,
            np.broadcast_to(d.f_lambda, (n + 1,)),
            laplacian(v, h),
            w * d.g_v,
            [corner],
            w * tv / grid.L,
            [tlam, teps],
        ]
    )
    return csc_matrix((data, (rows, cols)), shape=(n + 3, n + 3))


def _corrector(v, lam, eps, prev, tau, ds, P, grid, tol=1e-10, max_iter=12):
    """Newton on (PDE, constraint, arclength) at frozen tangent.

    Returns (v, lam, eps, iterations).  The arclength residual is
    <U - U_prev, tau> - ds in the branch metric.
    """
    pv, plam, peps = prev
    tv, tlam, teps = tau
    for it in range(max_iter + 1):
        S = State(v=v, lam=lam, grid=grid)
        r = np.empty(grid.n + 3)
        r[:-1] = residual(S, eps, P)
        r[-1] = _ip(grid, v - pv, lam - plam, eps - peps, tv, tlam, teps) - ds
        rnorm = float(np.max(np.abs(r)))
        if rnorm <= tol:
            return v, lam, eps, it
        if it == max_iter:
            raise NoConvergence(f"corrector residual {rnorm:.3e} after {max_iter} iterations")
        try:
            lu = splu(_extended_csc(v, lam, eps, P, grid, tau))
        except RuntimeError as exc:
            raise SingularJacobian(str(exc)) from exc
        delta = lu.solve(-r)
        if not np.all(np.isfinite(delta)):
            raise SingularJacobian("non-finite corrector step")
        v_try = v + delta[:-2]
        if np.min(1.0 + v_try) <= 0.5:
            raise LeftDomain("corrector step left 1 + v > 1/2")
        v, lam, eps = v_try, lam + delta[-2], eps + delta[-1]
    raise NoConvergence("corrector did not converge")


def _tangent(v, lam, eps, P, grid, tau_prev):
    """Unit tangent at a converged point, oriented along tau_prev.

    Solves the extended system with the previous tangent as normalization
    row; the right-hand side selects the one-dimensional null direction of
    the first n+2 rows.
    """
    rhs = np.zeros(grid.n + 3)
    rhs[-1] = 1.0
    try:
        lu = splu(_extended_csc(v, lam, eps, P, grid, tau_prev))
    except RuntimeError as exc:
        raise SingularJacobian(str(exc)) from exc
    t = lu.solve(rhs)
    tv, tlam, teps = t[:-2], float(t[-2]), float(t[-1])
    nrm = _norm(grid, tv, tlam, teps)
    if not (np.all(np.isfinite(t)) and nrm > 0.0):
        raise SingularJacobian("tangent solve failed")
    return tv / nrm, tlam / nrm, teps / nrm


# --- branch walking -----------------------------------------------------------


def _leading(state: State, eps: float, P: Params) -> float:
    return float(np.max(stability_spectrum(state, eps, P).real))


def _append_point(branch: Branch, v, lam, eps, compute_eigs: bool) -> BranchPoint:
    state = State(v=v.copy(), lam=lam, grid=branch.grid)
    s = amplitude(state, branch.k, branch.P)
    if compute_eigs:
        lead = _leading(state, eps, branch.P)
        stable = lead <= -_STABLE_MARGIN
    else:
        lead = math.nan
        stable = False
    pt = BranchPoint(s=s, eps=eps, lam=lam, state=state, leading_eig=lead, stable=stable)
    branch.points.append(pt)
    return pt


def _walk(
    branch: Branch,
    v,
    lam,
    eps,
    tau,
    ds,
    *,
    s_max: float | None,
    eps_min: float | None,
    stop_on_positivity: bool,
    compute_eigs: bool,
    tol: float = 1e-10,
) -> None:
    """March the branch, appending points to ``branch`` until a stop."""
    P, grid = branch.P, branch.grid
    ds0 = ds
    ds_cap = 8.0 * ds0
    ds_floor = ds0 * 2.0**-14
    easy_run = 0
    eps_sign = 0.0
    positivity_noted = any(e.startswith("positivity") for e in branch.events)

    while True:
        tv, tlam, teps = tau
        try:
            v_new, lam_new, eps_new, its = _corrector(
                v + ds * tv, lam + ds * tlam, eps + ds * teps,
                (v, lam, eps), tau, ds, P, grid, tol=tol,
            )
        except (NoConvergence, SingularJacobian, LeftDomain):
            ds *= 0.5
            easy_run = 0
            if ds < ds_floor:
                branch.events.append("corrector_exhausted")
                return
            continue

        easy_run = easy_run + 1 if its <= 4 else 0
        if easy_run >= 3:
            ds = min(1.3 * ds, ds_cap)
            easy_run = 0

        v, lam, eps = v_new, lam_new, eps_new
        pt = _append_point(branch, v, lam, eps, compute_eigs)

        vmin = float(np.min(v))
        if vmin < _POSITIVITY_FLOOR and not positivity_noted:
            branch.events.append(f"positivity@s={pt.s:.6g}")
            positivity_noted = True
            if stop_on_positivity:
                return
        if vmin <= 1e-9:
            branch.events.append(f"positivity_hard@s={pt.s:.6g}")
            return
        if s_max is not None and abs(pt.s) >= s_max:
            return
        if eps_min is not None and eps <= eps_min:
            return

        try:
            tau = _tangent(v, lam, eps, P, grid, tau)
        except SingularJacobian:
            branch.events.append("tangent_singular")
            return
        if tau[2] != 0.0:
            new_sign = math.copysign(1.0, tau[2])
            if eps_sign != 0.0 and new_sign * eps_sign < 0.0:
                branch.events.append(f"fold@s={pt.s:.6g}")
                return
            eps_sign = new_sign


def _discrete_eps_k(k: int, f_v_bar: float, grid: Grid) -> float:
    # exact crossing of the discrete cosine mode: eps = f_v / d_k with
    # d_k the eigenvalue of the reflected second-difference operator
    d_k = (2.0 / grid.h**2) * (1.0 - math.cos(k * math.pi * grid.h / grid.L))
    return f_v_bar / d_k


def branch_from_bifurcation(
    k: int,
    P: Params,
    eps_grid_tol: float = 1e-3,
    s_max: float = 0.05,
    step: float = 5e-3,
    n: int = 400,
    compute_eigs: bool = True,
) -> tuple[Branch, Branch]:
    """Both half-branches emerging at the k-th bifurcation of the constant state.

    Seeds at the exact discrete bifurcation value with the kernel tangent
    (cos(k pi x/L), 0, 0) in the two opposite directions.  SeedFailure is
    raised when the grid's own crossing disagrees with the closed-form
    bifurcation value by more than ``eps_grid_tol`` (relative) -- an
    under-resolved grid -- or when no first point converges.
    """
    eps_k = bifurcation_eps(k, P)
    grid = make_grid(n, P.L)
    cs = constant_state(P)
    f_v_bar = float(deriv_bundle(cs.v_bar, cs.lambda_bar, P).f_v)
    eps_seed = _discrete_eps_k(k, f_v_bar, grid)
    if abs(eps_seed - eps_k) > eps_grid_tol * eps_k:
        raise SeedFailure(
            f"discrete crossing {eps_seed:.6e} vs {eps_k:.6e}: grid too coarse for mode {k}"
        )

    mode = np.cos(k * np.pi * grid.nodes / grid.L)
    tau_v = mode / _norm(grid, mode, 0.0, 0.0)
    v0 = np.full(grid.n + 1, cs.v_bar)

    halves: list[Branch] = []
    for sign in (+1.0, -1.0):
        branch = Branch(k=k, points=[], origin_eps=eps_seed, P=P, grid=grid)
        tau = (sign * tau_v, 0.0, 0.0)
        _walk(
            branch, v0.copy(), cs.lambda_bar, eps_seed, tau, step,
            s_max=s_max, eps_min=None, stop_on_positivity=True,
            compute_eigs=compute_eigs,
        )
        if not branch.points:
            raise SeedFailure(f"no converged point off the constant state for mode {k}")
        halves.append(branch)
    return halves[0], halves[1]


def extend_to_small_eps(
    B: Branch, eps_min: float | None = None, compute_eigs: bool = True
) -> Branch:
    """Continue a half-branch down in eps until eps <= eps_min.

    Default eps_min is 1e-4 times the branch's origin.  Positivity falling
    under the soft floor is recorded as an event but does not stop the
    walk (the profiles merely develop exponentially small feet); only a
    hard loss (v <= 1e-9) or corrector exhaustion does.  The returned
    branch carries ``monotone_fraction``: the share of its profiles that
    are strictly monotone in x.
    """
    if eps_min is None:
        eps_min = 1e-4 * B.origin_eps
    if len(B.points) < 2:
        raise InsufficientData("need at least two points to resume a branch")
    p1, p0 = B.points[-2], B.points[-1]
    dv = p0.state.v - p1.state.v
    dlam = p0.lam - p1.lam
    deps = p0.eps - p1.eps
    ds = _norm(B.grid, dv, dlam, deps)
    tau = (dv / ds, dlam / ds, deps / ds)

    out = Branch(
        k=B.k, points=list(B.points), origin_eps=B.origin_eps,
        P=B.P, grid=B.grid, events=list(B.events),
    )
    _walk(
        out, p0.state.v.copy(), p0.lam, p0.eps, tau, ds,
        s_max=None, eps_min=eps_min, stop_on_positivity=False,
        compute_eigs=compute_eigs,
    )

    def _monotone(v: np.ndarray) -> bool:
        dv = np.diff(v)
        return bool(np.all(dv > 0.0) or np.all(dv < 0.0))

    out.monotone_fraction = sum(_monotone(p.state.v) for p in out.points) / len(out.points)
    return out


# --- bifurcation detection ----------------------------------------------------


def _det_sign(eps, f_v_bar, f_lam_bar, g_v_w, g_lam_corner, grid):
    """Sign of det of the bordered matrix at the constant state.

    det M = det(T) * (corner - r T^{-1} c) with T the tridiagonal PDE block;
    det(T) by the continuant recurrence with running rescaling (only the
    sign is needed), the Schur complement by one banded solve.
    """
    n, h = grid.n, grid.h
    a = -2.0 * eps / h**2 + f_v_bar
    off = eps / h**2

    # continuant: d_i = a d_{i-1} - u_{i-1} l_i d_{i-2}
    sign = 1.0
    d_prev = 1.0
    d = a
    if d < 0.0:
        sign = -sign
        d = -d
        d_prev = -d_prev
    for i in range(1, n + 1):
        u = 2.0 * off if i == 1 else off          # upper entry above row i
        l = 2.0 * off if i == n else off          # lower entry in row i
        d_new = a * d - u * l * d_prev
        d_prev, d = d, d_new
        if d == 0.0:
            return 0.0
        if d < 0.0:
            sign = -sign
            d, d_prev = -d, -d_prev
        if d > 1e100:
            d *= 1e-100
            d_prev *= 1e-100
        elif d < 1e-100:
            d *= 1e100
            d_prev *= 1e100

    ab = np.zeros((3, n + 1))
    ab[0, 1:] = off
    ab[0, 1] = 2.0 * off
    ab[1, :] = a
    ab[2, :-1] = off
    ab[2, n - 1] = 2.0 * off
    c = np.full(n + 1, f_lam_bar)
    try:
        x = solve_banded((1, 1), ab, c)
    except np.linalg.LinAlgError:
        return 0.0
    schur = g_lam_corner - float(g_v_w @ x)
    return sign * math.copysign(1.0, schur) if schur != 0.0 else 0.0


def detect_bifurcations(
    P: Params, eps_range: tuple[float, float], k_max: int, n: int = 800
) -> list[tuple[int, float]]:
    """Sweep eps for sign changes of det of the constant-state linearization.

    Returns (k, eps) pairs sorted by descending eps, keeping modes up to
    k_max.  Each sign change is sharpened by bisection to a relative 1e-6
    and attributed to a cosine mode by projecting an inverse-iteration
    kernel vector onto the discrete cosines.
    """
    cs = constant_state(P)
    grid = make_grid(n, P.L)
    d = deriv_bundle(cs.v_bar, cs.lambda_bar, P)
    if not d.f_v > 0.0:
        return []
    w = grid.weights
    g_v_w = w * np.broadcast_to(d.g_v, (n + 1,))
    corner = float(w @ np.broadcast_to(d.g_lambda, (n + 1,)))

    lo, hi = eps_range
    if not (0.0 < lo < hi):
        raise ValueError("eps_range must satisfy 0 < lo < hi")
    m = max(48, 16 * k_max)
    eps_grid = np.geomspace(lo, hi, m)

    def tau(e: float) -> float:
        return _det_sign(e, d.f_v, d.f_lambda, g_v_w, corner, grid)

    signs = [tau(e) for e in eps_grid]
    found: list[tuple[int, float]] = []
    v_bar_vec = np.full(n + 1, cs.v_bar)
    for i in range(m - 1):
        s_a, s_b = signs[i], signs[i + 1]
        if s_a == 0.0 or s_a * s_b >= 0.0:
            continue
        a, b = float(eps_grid[i]), float(eps_grid[i + 1])
        while (b - a) > 1e-6 * a:
            mid = 0.5 * (a + b)
            s_mid = tau(mid)
            if s_mid == 0.0:
                a = b = mid
                break
            if s_mid * s_a < 0.0:
                b = mid
            else:
                a = mid
        eps_star = 0.5 * (a + b)
        k_found = _identify_mode(eps_star, v_bar_vec, cs.lambda_bar, P, grid, k_max)
        if k_found is not None:
            found.append((k_found, eps_star))
    found.sort(key=lambda pair: -pair[1])
    return found


def _identify_mode(eps_star, v_bar_vec, lam_bar, P, grid, k_max):
    """Attribute a located singularity to a cosine mode by inverse iteration."""
    from .solve import _bordered_csc  # same assembly as the solver uses

    n = grid.n
    A = _bordered_csc(v_bar_vec, lam_bar, eps_star * (1.0 + 1e-9), P, grid)
    try:
        lu = splu(A.tocsc())
    except RuntimeError:
        return None
    x = np.zeros(n + 2)
    jmax = min(k_max + 2, n // 2)
    for j in range(1, jmax + 1):
        x[:-1] += np.cos(j * np.pi * grid.nodes / grid.L)
    x[-1] = 0.1
    for _ in range(4):
        x = lu.solve(x)
        x /= float(np.max(np.abs(x)))
    coeffs = [
        abs(float((2.0 / grid.L) * (grid.weights @ (x[:-1] * np.cos(j * np.pi * grid.nodes / grid.L)))))
        for j in range(1, jmax + 1)
    ]
    k_found = 1 + int(np.argmax(coeffs))
    return k_found if k_found <= k_max else None


# --- fitting and tabulation ----------------------------------------------------


def fit_pitchfork(B: Branch, s_window: float) -> dict[str, float]:
    """Least-squares fit eps(s) - eps_k ~ K1 s + K2 s^2 (and the same for
    lambda) over the points with 0 < |s| <= s_window.

    Raises InsufficientData with fewer than 8 points in the window.  The
    eps intercept is pinned to the branch's own discrete origin so the fit
    measures branch curvature, not grid bias.
    """
    pts = [p for p in B.points if 0.0 < abs(p.s) <= s_window]
    if len(pts) < 8:
        raise InsufficientData(
            f"{len(pts)} points inside |s| <= {s_window:g}; need at least 8"
        )
    s = np.array([p.s for p in pts])
    X = np.column_stack([s, s * s])
    y_eps = np.array([p.eps for p in pts]) - B.origin_eps
    lam_bar = constant_state(B.P).lambda_bar
    y_lam = np.array([p.lam for p in pts]) - lam_bar
    (k1, k2), *_ = np.linalg.lstsq(X, y_eps, rcond=None)
    (_, lam2), *_ = np.linalg.lstsq(X, y_lam, rcond=None)
    return {"K1_fit": float(k1), "K2_fit": float(k2), "lambda2_fit": float(lam2)}


def merge_halves(plus: Branch, minus: Branch) -> Branch:
    """One branch from two halves, points ordered by increasing s."""
    if plus.k != minus.k:
        raise ValueError("halves belong to different modes")
    pts = sorted(minus.points + plus.points, key=lambda p: p.s)
    return Branch(
        k=plus.k,
        points=pts,
        origin_eps=plus.origin_eps,
        P=plus.P,
        grid=plus.grid,
        events=minus.events + plus.events,
    )


def branch_table(B: Branch) -> tuple[list[str], list[list[float]]]:
    """Column names and rows for serializing a branch."""
    cols = ["s", "eps", "lambda", "v_min", "v_max", "v0", "vL", "leading_eig", "stable"]
    rows = []
    for p in B.points:
        v = p.state.v
        rows.append(
            [
                p.s,
                p.eps,
                p.lam,
                float(np.min(v)),
                float(np.max(v)),
                float(v[0]),
                float(v[-1]),
                p.leading_eig,
                float(p.stable),
            ]
        )
    return cols, rows
