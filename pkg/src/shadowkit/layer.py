"""Sharp transition layers at small eps (b1 = 0 branch of the theory).

The inner problem for a monotone layer profile V0(z), z = (x - x0)/sqrt(eps),
is the planar heteroclinic connecting the rest states 0 and v2(lambda) of

    V0'' + f(V0, lambda) = 0,

which exists exactly when the equal-area balance int_0^{v2} f dv = 0 holds.
The orbit is built from the first integral (V0')^2 = -2 Phi(V0) by
quadrature in the log of the distance to the approached rest state: on each
tail that substitution has a bounded, smooth integrand, so high-order
panel quadrature gives the map z(V0) essentially to machine precision.  The
two half-orbits are glued at V0 = v2/2 (z = 0).

A full-interval approximation V_eps is then composed from the rescaled
profile and C-infinity cutoffs, used both as a residual probe and as the
Newton seed for the coupled solve at small eps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .analytic import layer_targets, maxwell_gap, maxwell_lambda
from .discretize import Grid, State, laplacian, make_grid
from .exceptions import (
    LeftDomain,
    NegativeEnergy,
    NoConvergence,
    SeedRejected,
    SingularJacobian,
    Unbalanced,
)
from .model import Params, deriv_bundle, equilibria_of_lambda, reaction_f, constraint_g
from .solve import newton

__all__ = [
    "Heteroclinic",
    "LayerAnsatz",
    "GResidual",
    "LayerReport",
    "potential",
    "heteroclinic",
    "compose_ansatz",
    "residual_G",
    "constraint_I",
    "layer_solve",
]

EPS_LAYER_MAX = 1e-3


def _vm_log1p(v):
    """v - log(1+v), accurate for tiny v (series below 1e-3)."""
    v = np.asarray(v, dtype=float)
    small = np.abs(v) < 1e-3
    out = np.empty_like(v)
    vs = v[small]
    out[small] = vs * vs * (1.0 / 2.0 + vs * (-1.0 / 3.0 + vs * (1.0 / 4.0 + vs * (-1.0 / 5.0 + vs / 6.0))))
    vb = v[~small]
    out[~small] = vb - np.log1p(vb)
    return out


def _tail3(v):
    """v - log(1+v) - v^2/2 = -v^3/3 + v^4/4 - ..., accurate for tiny v."""
    v = np.asarray(v, dtype=float)
    small = np.abs(v) < 0.02
    out = np.empty_like(v)
    vs = v[small]
    # alternating series through v^9; relative truncation error ~ v^7
    acc = np.zeros_like(vs)
    for n in range(9, 2, -1):
        acc = vs * acc + ((-1.0) ** n) / n
    out[small] = vs**3 * acc
    vb = v[~small]
    out[~small] = vb - np.log1p(vb) - 0.5 * vb * vb
    return out


def potential(v, lam: float, P: Params):
    """Phi(v) = int_0^v f(u, lambda) du, closed form."""
    v = np.asarray(v, dtype=float)
    return P.a2 * v**2 / 2.0 - P.c2 * v**3 / 3.0 - P.b2 * lam * _vm_log1p(v)


def _phi_grouped(v, lam: float, P: Params):
    """Phi(v) with the quadratic terms grouped: (a2 - b2 lam) v^2/2 leads,
    so the value keeps full relative accuracy down to v ~ 1e-300."""
    v = np.asarray(v, dtype=float)
    return (P.a2 - P.b2 * lam) * v**2 / 2.0 - P.c2 * v**3 / 3.0 - P.b2 * lam * _tail3(v)


def _f_near_v2(w, lam: float, v2: float, P: Params):
    """f(v2 - w, lambda) written without cancellation at the rest state."""
    w = np.asarray(w, dtype=float)
    return w * (P.c2 - P.b2 * lam / ((1.0 + v2) * (1.0 + v2 - w))) * (v2 - w)


_GL5_X, _GL5_W = np.polynomial.legendre.leggauss(5)
_GL48_X, _GL48_W = np.polynomial.legendre.leggauss(48)


def _panel_integrals(lo_edges, hi_edges, fun):
    """5-point Gauss-Legendre on each [lo, hi] panel; fun maps arrays."""
    mid = 0.5 * (lo_edges + hi_edges)
    half = 0.5 * (hi_edges - lo_edges)
    pts = mid[:, None] + half[:, None] * _GL5_X[None, :]
    vals = fun(pts)
    return half * (vals @ _GL5_W)


def _R_right(W, lam: float, v2: float, P: Params):
    """R(W) = int_0^W f(v2 - w) dw > 0 on the upper tail (48-pt GL)."""
    W = np.asarray(W, dtype=float)
    half = 0.5 * W
    w = half[..., None] * (_GL48_X[None, :] + 1.0)
    return half * (_f_near_v2(w, lam, v2, P) @ _GL48_W)


@dataclass
class Heteroclinic:
    """Monotone connection V0(z) between 0 (z -> -inf) and v2 (z -> +inf).

    z_grid/V0 are a stored sampling on a tanh-stretched symmetric grid;
    evaluation at arbitrary z goes through cubic Hermite interpolants of
    log V0 (left tail) and log(v2 - V0) (right tail) built with the exact
    first-integral slopes, extended by the exact exponential rates beyond
    the construction tables.
    """

    lam: float
    z_grid: np.ndarray = field(repr=False)
    V0: np.ndarray = field(repr=False)
    kappa_minus: float
    kappa_plus: float
    v2: float
    Z: float
    _left: CubicHermiteSpline = field(repr=False, default=None)
    _right: CubicHermiteSpline = field(repr=False, default=None)
    _P: Params = field(repr=False, default=None)

    def evaluate(self, z) -> np.ndarray:
        """V0 at arbitrary z (vectorized; scalar in, scalar out)."""
        scalar = np.ndim(z) == 0
        z = np.atleast_1d(np.asarray(z, dtype=float))
        out = np.empty_like(z)
        zl_min = self._left.x[0]
        zr_max = self._right.x[-1]

        left = z <= 0.0
        zl = z[left]
        core = zl >= zl_min
        logv = np.empty_like(zl)
        logv[core] = self._left(zl[core])
        # beyond the table the orbit is exactly exponential at rate kappa_minus
        logv[~core] = self._left(zl_min) + self.kappa_minus * (zl[~core] - zl_min)
        out[left] = np.exp(logv)

        zr = z[~left]
        core = zr <= zr_max
        logw = np.empty_like(zr)
        logw[core] = self._right(zr[core])
        logw[~core] = self._right(zr_max) - self.kappa_plus * (zr[~core] - zr_max)
        out[~left] = self.v2 - np.exp(logw)
        return float(out[0]) if scalar else out

    def first_integral_drift(self) -> float:
        """max |(V0')^2/2 + Phi(V0)| probed between all construction nodes.

        The derivative comes from the interpolant, the potential from the
        closed form, so the check is not circular: it measures how well the
        constructed map z -> V0 satisfies the orbit's first integral.  Both
        halves are measured against the single energy level of the saddle at
        0, so an unbalanced splice cannot pass.
        """
        drift = 0.0
        zl = self._left.x
        zm = 0.5 * (zl[:-1] + zl[1:])
        V = np.exp(self._left(zm))
        dV = V * self._left.derivative()(zm)
        E = 0.5 * dV * dV + _phi_grouped(V, self.lam, self._P)
        drift = max(drift, float(np.max(np.abs(E))))

        zr = self._right.x
        zm = 0.5 * (zr[:-1] + zr[1:])
        W = np.exp(self._right(zm))
        dV = -W * self._right.derivative()(zm)
        E = 0.5 * dV * dV + _phi_grouped(self.v2 - W, self.lam, self._P)
        drift = max(drift, float(np.max(np.abs(E))))
        return drift


@dataclass
class LayerAnsatz:
    x0: float
    eps: float
    V_eps: np.ndarray = field(repr=False)
    Lstar: float
    chi0: np.ndarray = field(repr=False)
    chi1: np.ndarray = field(repr=False)
    grid: Grid = None
    lam: float = math.nan
    v2: float = math.nan


@dataclass(frozen=True)
class GResidual:
    sup_G: float
    profile: np.ndarray = field(repr=False)


@dataclass
class LayerReport:
    state: State
    lambda_eps: float
    layer_x: float
    sup_dev: float
    targets: object
    maxwell_gap_at_lambda0: float
    eps: float
    x0: float
    recomposed: LayerAnsatz | None = None


def tail_rates(lam: float, P: Params) -> tuple[float, float]:
    """Closed-form decay rates of the connecting profile's two tails.

    kappa_minus = sqrt(-f_v(0, lam)) and kappa_plus = sqrt(-f_v(v2, lam)),
    available for any lambda in the bistable window without building the
    orbit itself.
    """
    v2 = equilibria_of_lambda(lam, P).v2
    if not v2 > 0.0:
        raise NegativeEnergy("upper rest state is not positive")
    rate0 = P.b2 * lam - P.a2          # -f_v at v = 0
    rate2 = -float(deriv_bundle(v2, lam, P).f_v)
    if rate0 <= 0.0 or rate2 <= 0.0:
        raise NegativeEnergy("rest states are not both hyperbolic attractors of the tails")
    return math.sqrt(rate0), math.sqrt(rate2)


def heteroclinic(
    lam: float,
    P: Params,
    Z: float | None = None,
    gap_tol: float = 1e-10,
    table_panels: int = 20000,
    stored_points: int = 2001,
) -> Heteroclinic:
    """Construct the layer profile at a balanced lambda.

    Raises Unbalanced when |equal-area gap| > gap_tol, and NegativeEnergy
    if the first-integral radicand loses positivity along either tail
    (no monotone connection).  Z defaults to 40 / min(kappa_minus,
    kappa_plus) so both stored tails span 40 e-folds.
    """
    gap = maxwell_gap(lam, P)
    if abs(gap) > gap_tol:
        raise Unbalanced(f"equal-area gap {gap:.3e} exceeds {gap_tol:.1e} at lambda={lam:g}")
    v2 = equilibria_of_lambda(lam, P).v2
    if not v2 > 0.0:
        raise NegativeEnergy("upper rest state is not positive")
    kappa_minus, kappa_plus = tail_rates(lam, P)
    if Z is None:
        Z = 40.0 / min(kappa_minus, kappa_plus)
    mid = 0.5 * v2

    # ---- left tail: theta = log V, dz/dtheta = V / sqrt(-2 Phi(V)) ----
    theta_hi = math.log(mid)
    theta = np.linspace(theta_hi - (kappa_minus * Z + 8.0), theta_hi, table_panels + 1)

    def q_left(th):
        V = np.exp(th)
        rad = -2.0 * _phi_grouped(V, lam, P)
        if np.any(rad <= 0.0):
            raise NegativeEnergy("radicand lost positivity on the lower tail")
        return V / np.sqrt(rad)

    panels = _panel_integrals(theta[:-1], theta[1:], q_left)
    z_left = np.concatenate([[0.0], np.cumsum(panels)])
    z_left -= z_left[-1]               # z = 0 at V = v2/2, negative below
    slopes = 1.0 / q_left(theta)
    left = CubicHermiteSpline(z_left, theta, slopes)

    # ---- right tail: psi = log W, W = v2 - V, dz/dpsi = -W / sqrt(2 R(W)) ----
    psi_hi = math.log(mid)
    psi = np.linspace(psi_hi - (kappa_plus * Z + 8.0), psi_hi, table_panels + 1)

    def q_right(ps):
        W = np.exp(ps)
        rad = 2.0 * _R_right(W, lam, v2, P)
        if np.any(rad <= 0.0):
            raise NegativeEnergy("radicand lost positivity on the upper tail")
        return W / np.sqrt(rad)

    panels = _panel_integrals(psi[:-1], psi[1:], q_right)
    # walking psi downward from v2/2 moves z upward from 0
    z_right = np.concatenate([[0.0], np.cumsum(panels[::-1])])
    psi_desc = psi[::-1]
    right = CubicHermiteSpline(z_right, psi_desc, -1.0 / q_right(psi_desc))

    H = Heteroclinic(
        lam=lam,
        z_grid=np.empty(0),
        V0=np.empty(0),
        kappa_minus=kappa_minus,
        kappa_plus=kappa_plus,
        v2=v2,
        Z=Z,
        _left=left,
        _right=right,
        _P=P,
    )
    # stored sampling, uniform in tanh(0.15 z): dense near the interface,
    # sparse (but exact to the interpolant) far out
    gamma = 0.15
    u = np.linspace(-math.tanh(gamma * Z), math.tanh(gamma * Z), stored_points)
    z_grid = np.arctanh(u) / gamma
    z_grid[stored_points // 2] = 0.0
    H.z_grid = z_grid
    H.V0 = H.evaluate(z_grid)
    return H


def _smoothstep(u):
    """C-infinity ramp: 0 for u <= 0, 1 for u >= 1."""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(u > 0.0, np.exp(-1.0 / np.where(u > 0.0, u, 1.0)), 0.0)
        b = np.where(u < 1.0, np.exp(-1.0 / np.where(u < 1.0, 1.0 - u, 1.0)), 0.0)
    return a / (a + b)


def compose_ansatz(H: Heteroclinic, x0: float, eps: float, grid: Grid) -> LayerAnsatz:
    """Full-interval approximation: cutoff inner profile plus plateau filler.

    chi0 is 1 within L*/4 of the interface and 0 beyond L*/2 (L* the
    distance from x0 to the nearest endpoint); chi1 raises the far right
    plateau to v2.  Between the collars everything is C-infinity.
    """
    x = grid.nodes
    y = x - x0
    Lstar = min(x0, grid.L - x0)
    if not Lstar > 0.0:
        raise ValueError("x0 must lie strictly inside the interval")
    ay = np.abs(y)
    chi0 = _smoothstep((0.5 * Lstar - ay) / (0.25 * Lstar))
    chi1 = np.where(y > 0.0, H.v2 * (1.0 - chi0), 0.0)
    V_eps = chi0 * H.evaluate(y / math.sqrt(eps)) + chi1
    return LayerAnsatz(
        x0=x0, eps=eps, V_eps=V_eps, Lstar=Lstar, chi0=chi0, chi1=chi1,
        grid=grid, lam=H.lam, v2=H.v2,
    )


def residual_G(ansatz: LayerAnsatz, lam: float, P: Params) -> GResidual:
    """Scaled PDE defect of the ansatz: (eps V'' + f(V, lambda)) / sqrt(eps)."""
    g = ansatz.grid
    prof = (
        ansatz.eps * laplacian(ansatz.V_eps, g.h) + reaction_f(ansatz.V_eps, lam, P)
    ) / math.sqrt(ansatz.eps)
    return GResidual(sup_G=float(np.max(np.abs(prof))), profile=prof)


def constraint_I(eps: float, lam: float, v: np.ndarray, P: Params) -> float:
    """Trapezoid value of the nonlocal constraint for a nodal profile.

    eps parameterizes the family the profile belongs to; the density itself
    does not involve it.
    """
    v = np.asarray(v, dtype=float)
    grid = make_grid(v.size - 1, P.L)
    return float(grid.weights @ constraint_g(v, lam, P))


def layer_solve(
    x0: float,
    eps: float,
    P: Params,
    n: int | None = None,
    tol: float = 1e-10,
) -> LayerReport:
    """Converged layered steady state near interface position x0.

    Builds the balanced heteroclinic, composes the sharp-interface seed,
    and hands (V_eps, lambda0_bar) to the coupled Newton solver.  The
    report carries the attained lambda, the detected interface position
    (half-height crossing), and the sup deviation from the ansatz
    recomposed at that detected position.
    """
    if eps > EPS_LAYER_MAX:
        raise ValueError(f"layer solve expects eps <= {EPS_LAYER_MAX:g}")
    targets = layer_targets(x0, P)     # also enforces b1 = 0 and the hypothesis
    if n is None:
        n = max(400, int(math.ceil(12.0 * P.L / math.sqrt(eps))))
    grid = make_grid(n, P.L)

    lam_star = maxwell_lambda(P)
    H = heteroclinic(lam_star, P)
    ansatz = compose_ansatz(H, x0, eps, grid)
    seed = State(v=ansatz.V_eps.copy(), lam=targets.lambda0_bar, grid=grid)
    try:
        state = newton(seed, eps, P, tol=tol, max_iter=40)
    except (NoConvergence, LeftDomain, SingularJacobian) as exc:
        raise SeedRejected(f"sharp-interface seed rejected: {exc}") from exc

    v2_eps = equilibria_of_lambda(state.lam, P).v2
    half = 0.5 * v2_eps
    layer_x = math.nan
    v = state.v
    for i in range(n):
        if (v[i] - half) * (v[i + 1] - half) <= 0.0 and v[i] != v[i + 1]:
            layer_x = grid.nodes[i] + grid.h * (half - v[i]) / (v[i + 1] - v[i])
            break

    if math.isfinite(layer_x):
        recomposed = compose_ansatz(H, layer_x, eps, grid)
        sup_dev = float(np.max(np.abs(v - recomposed.V_eps)))
    else:
        recomposed = None
        sup_dev = math.inf

    return LayerReport(
        state=state,
        lambda_eps=state.lam,
        layer_x=layer_x,
        sup_dev=sup_dev,
        targets=targets,
        maxwell_gap_at_lambda0=maxwell_gap(targets.lambda0_bar, P),
        eps=eps,
        x0=x0,
        recomposed=recomposed,
    )
