"""Closed-form results at the constant state: bifurcation values, branch
direction, the quadratic sign chart, sharp-interface targets, and the
equal-area balance.

Everything in here is algebra on the coefficients; no grids are involved.
Derivatives at the constant state are written with a bar in comments,
e.g. f_v means df/dv evaluated at (v_bar, lambda_bar).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.integrate import quad
from scipy.optimize import brentq

from .exceptions import (
    Degenerate,
    HypothesisFailed,
    NotPositive,
    RequiresB1Zero,
    X0OutOfRange,
)
from .model import (
    Params,
    constant_state,
    deriv_bundle,
    equilibria_of_lambda,
    reaction_f,
)

__all__ = [
    "PitchforkCoeffs",
    "SignChart",
    "Classification",
    "LayerTargets",
    "bifurcation_eps",
    "pitchfork_coeffs",
    "pitchfork_k2_projection",
    "sign_chart",
    "classify_stability",
    "mu_dot",
    "layer_targets",
    "maxwell_gap",
    "maxwell_lambda",
]


@dataclass(frozen=True)
class PitchforkCoeffs:
    """Taylor data of the branch eps(s) = eps_k + K1*s + K2*s^2 + O(s^3)."""

    k: int
    eps_k: float
    K1: float
    K2: float
    lambda2_bar: float
    int_phi2: float
    int_phi2_cos2k: float
    t: float


@dataclass(frozen=True)
class SignChart:
    """Quadratic F(t) = alpha*t^2 + beta*t + gamma deciding the sign of K2.

    t = b2*lambda_bar/(1 + v_bar)^2 and the admissible window is t > c2
    (equivalent to the positivity band for the linearized reaction).
    """

    alpha: float
    beta: float
    gamma: float
    regime: str
    roots_in_window: tuple[float, ...]


@dataclass(frozen=True)
class Classification:
    direction: str
    stable: bool
    K2: float


@dataclass(frozen=True)
class LayerTargets:
    """Limiting interface data for b1 = 0.

    x1 < x0 < x2 is the admissible interface band, v2_limit the height of
    the upper plateau selected by the constraint, and lambda0_bar the value
    of lambda at which that plateau is a constant equilibrium.
    """

    x1: float
    x2: float
    v2_limit: float
    lambda0_bar: float


def bifurcation_eps(k: int, P: Params) -> float:
    """k-th bifurcation value eps_k = f_v * L^2 / (k*pi)^2 at the constant state.

    Requires the positivity band (f_v > 0); otherwise no bifurcation exists
    and NotPositive is raised.
    """
    if k < 1:
        raise ValueError("mode index k must be >= 1")
    cs = constant_state(P)
    f_v = deriv_bundle(cs.v_bar, cs.lambda_bar, P).f_v
    if not f_v > 0.0:
        raise NotPositive(f"linearized reaction coefficient f_v = {f_v:g} <= 0")
    return f_v * P.L**2 / (k * math.pi) ** 2


def _t_value(P: Params) -> float:
    cs = constant_state(P)
    return P.b2 * cs.lambda_bar / (1.0 + cs.v_bar) ** 2


def _chart_coeffs(v_bar: float, c2: float) -> tuple[float, float, float]:
    alpha = 3.0 * v_bar - 4.0
    beta = -(12.0 * v_bar**2 + 7.0 * v_bar - 8.0) * c2
    gamma = (14.0 * v_bar**2 + 4.0 * v_bar - 4.0) * c2**2
    return alpha, beta, gamma


def _chart_value(t: float, v_bar: float, c2: float) -> float:
    alpha, beta, gamma = _chart_coeffs(v_bar, c2)
    return (alpha * t + beta) * t + gamma


def pitchfork_coeffs(k: int, P: Params) -> PitchforkCoeffs:
    """Branch expansion coefficients at the k-th bifurcation point (b1 = 0).

    K1 vanishes by symmetry.  K2 is evaluated through the quadratic chart

        K2 = (2 L^2/(k pi)^2) * F(t) / (24 v_bar (1+v_bar)^2 (t - c2)),

    t = b2*lambda_bar/(1+v_bar)^2.  Also returns the second-order data the
    chart condenses: lambda2_bar and the two projections of the second-order
    profile correction (its mean and its cos(2k pi x/L) moment).
    """
    if P.b1 != 0.0:
        raise RequiresB1Zero("branch direction chart is derived for b1 = 0")
    eps_k = bifurcation_eps(k, P)  # also enforces positivity
    cs = constant_state(P)
    v_bar, lam_bar = cs.v_bar, cs.lambda_bar
    d = deriv_bundle(v_bar, lam_bar, P)
    delta = d.f_v * d.g_lambda - d.f_lambda * d.g_v
    L = P.L

    int_phi2_cos2k = d.f_vv * L / (24.0 * d.f_v)
    int_phi2 = (d.f_lambda * d.g_vv - d.f_vv * d.g_lambda) * L / (4.0 * delta)
    lambda2_bar = (d.f_vv * d.g_v - d.f_v * d.g_vv) / (4.0 * delta)

    t = _t_value(P)
    F = _chart_value(t, v_bar, P.c2)
    K2 = (2.0 * L**2 / (k * math.pi) ** 2) * F / (
        24.0 * v_bar * (1.0 + v_bar) ** 2 * (t - P.c2)
    )
    return PitchforkCoeffs(
        k=k,
        eps_k=eps_k,
        K1=0.0,
        K2=K2,
        lambda2_bar=lambda2_bar,
        int_phi2=int_phi2,
        int_phi2_cos2k=int_phi2_cos2k,
        t=t,
    )


def pitchfork_k2_projection(k: int, P: Params) -> float:
    """K2 assembled directly from the second-order projections.

        (k^2 pi^2 / 2L) K2 = f_vv/2 * (int_phi2_cos2k + int_phi2)
                             + (L/2) f_vlambda * lambda2_bar
                             + (L/16) f_vvv

    This is the same quantity as PitchforkCoeffs.K2 assembled without the
    condensed chart, and is kept as an independent cross-check route.
    """
    c = pitchfork_coeffs(k, P)
    cs = constant_state(P)
    d = deriv_bundle(cs.v_bar, cs.lambda_bar, P)
    L = P.L
    rhs = (
        0.5 * d.f_vv * (c.int_phi2_cos2k + c.int_phi2)
        + 0.5 * L * d.f_vlambda * c.lambda2_bar
        + (L / 16.0) * d.f_vvv
    )
    return 2.0 * L * rhs / (k * math.pi) ** 2


def sign_chart(P: Params) -> SignChart:
    """Coefficients and window roots of the direction quadratic F(t) (b1 = 0).

    The regime is decided by v_bar against 4/3 (where the leading
    coefficient changes sign and F degenerates to a linear chart).
    """
    if P.b1 != 0.0:
        raise RequiresB1Zero("branch direction chart is derived for b1 = 0")
    cs = constant_state(P)
    v_bar = cs.v_bar
    c2 = P.c2
    alpha, beta, gamma = _chart_coeffs(v_bar, c2)

    tol = 1e-12 * max(1.0, abs(v_bar))
    if abs(v_bar - 4.0 / 3.0) <= tol:
        regime = "vbar_eq_4_3"
    elif v_bar < 4.0 / 3.0:
        regime = "vbar_below_4_3"
    else:
        regime = "vbar_above_4_3"

    roots: list[float] = []
    if regime == "vbar_eq_4_3":
        # alpha = 0 up to rounding: linear chart, single root.
        roots.append(gamma / (-beta))
    else:
        disc = beta * beta - 4.0 * alpha * gamma
        if disc >= 0.0:
            # Stable quadratic evaluation (avoid cancellation in -b +/- sqrt).
            q = -0.5 * (beta + math.copysign(math.sqrt(disc), beta))
            r1, r2 = q / alpha, gamma / q
            roots.extend(sorted((r1, r2)))
    in_window = tuple(r for r in roots if r > c2)
    return SignChart(
        alpha=alpha, beta=beta, gamma=gamma, regime=regime, roots_in_window=in_window
    )


def classify_stability(k: int, P: Params) -> Classification:
    """Direction and near-onset stability of the k-th branch (b1 = 0).

    K2 < 0: branch opens toward smaller eps ("left") and the small-amplitude
    states inherit stability from the constant state; K2 > 0: opens "right"
    and they are unstable.  Raises Degenerate when F(t) sits on the sign
    boundary within 1e-8 * c2^2.
    """
    coeffs = pitchfork_coeffs(k, P)
    cs = constant_state(P)
    F = _chart_value(coeffs.t, cs.v_bar, P.c2)
    if abs(F) <= 1e-8 * P.c2**2:
        raise Degenerate(f"direction chart F(t) = {F:.3e} is on the sign boundary")
    if coeffs.K2 < 0.0:
        return Classification(direction="left", stable=True, K2=coeffs.K2)
    return Classification(direction="right", stable=False, K2=coeffs.K2)


def mu_dot(k: int, P: Params) -> float:
    """Crossing speed of the k-th critical eigenvalue in eps: -(k pi / L)^2."""
    if k < 1:
        raise ValueError("mode index k must be >= 1")
    return -((k * math.pi / P.L) ** 2)


def layer_targets(x0: float, P: Params) -> LayerTargets:
    """Limiting plateau and interface data for an interface at x0 (b1 = 0).

    Valid under the coefficient hypothesis a2 - c2 > 2 a1 c2 / c1, which
    makes the admissible interface band (x1, x2) nonempty and keeps the
    limiting plateau inside the stable range.
    """
    if P.b1 != 0.0:
        raise RequiresB1Zero("sharp-interface limit is derived for b1 = 0")
    a1, c1, a2, b2, c2, L = P.a1, P.c1, P.a2, P.b2, P.c2, P.L
    if not a2 - c2 > 2.0 * a1 * c2 / c1:
        raise HypothesisFailed(
            f"need a2 - c2 > 2 a1 c2 / c1; got {a2 - c2:g} <= {2 * a1 * c2 / c1:g}"
        )
    denom = (a1 + c1) * (a2 - c2)
    x1 = L * (c1 * (a2 - c2) - 2.0 * a1 * c2) / denom
    x2 = L * (c1 * (a2 - c2) - a1 * c2) / denom
    if not (x1 < x0 < x2):
        raise X0OutOfRange(f"x0 = {x0:g} outside admissible band ({x1:g}, {x2:g})")
    v2_limit = a1 * L / (c1 * L - (a1 + c1) * x0)
    lambda0_bar = (a2 - c2 * v2_limit) * (1.0 + v2_limit) / b2
    return LayerTargets(x1=x1, x2=x2, v2_limit=v2_limit, lambda0_bar=lambda0_bar)


def maxwell_gap(lam: float, P: Params) -> float:
    """Equal-area defect: integral of f(., lambda) from 0 to the upper root v2.

    Zero exactly at the balanced lambda where a standing interface between
    the 0 and v2 plateaus can exist.  Computed by adaptive quadrature.
    """
    v2 = equilibria_of_lambda(lam, P).v2
    val, _ = quad(
        lambda v: reaction_f(v, lam, P), 0.0, v2, epsabs=1e-13, epsrel=1e-12, limit=200
    )
    return val


def maxwell_lambda(P: Params, xtol: float = 1e-13) -> float:
    """The balanced lambda: unique zero of maxwell_gap in the lambda window.

    The gap is positive at the low end of the window and negative at the
    fold end, and strictly decreasing in between, so a bracketing root find
    is safe.
    """
    if not P.a2 > P.c2:
        raise HypothesisFailed("need a2 > c2 for a positive upper plateau")
    lo = P.a2 / P.b2
    hi = (P.a2 + P.c2) ** 2 / (4.0 * P.b2 * P.c2)
    return brentq(lambda lam: maxwell_gap(lam, P), lo, hi, xtol=xtol)
