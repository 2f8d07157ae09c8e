"""Problem data for the constrained scalar steady-state problem.

The object of study is the boundary value problem on (0, L)

    eps * v'' + f(v, lambda) = 0,      v'(0) = v'(L) = 0,
    int_0^L g(v, lambda) dx = 0,

with reaction and constraint densities

    f(v, lambda) = (a2 - b2*lambda/(1 + v) - c2*v) * v,
    g(v, lambda) = (a1 - c1*v)/(1 + v) - b1*lambda/(1 + v)**2.

This module holds the parameter record, f and g and their partial
derivatives, the positive constant solution, the constant roots of
f(., lambda), and the admissibility checks that gate the analytic and
numerical machinery downstream.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import NoRealRoots, OrderingViolated

__all__ = [
    "Params",
    "ConstantState",
    "DerivBundle",
    "Equilibria",
    "Admissibility",
    "reaction_f",
    "constraint_g",
    "constant_state",
    "deriv_bundle",
    "equilibria_of_lambda",
    "admissible",
]


@dataclass(frozen=True)
class Params:
    """Coefficient set (a1, b1, c1, a2, b2, c2) and interval length L.

    All coefficients except b1 must be strictly positive; b1 >= 0.
    """

    a1: float
    b1: float
    c1: float
    a2: float
    b2: float
    c2: float
    L: float = 1.0

    def __post_init__(self) -> None:
        for name in ("a1", "c1", "a2", "b2", "c2", "L"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        if self.b1 < 0.0:
            raise ValueError("b1 must be nonnegative")

    # Ratio shorthands; the ordering of (B, A, C) decides existence of the
    # positive constant state.
    @property
    def A(self) -> float:
        return self.a1 / self.a2

    @property
    def B(self) -> float:
        return self.b1 / self.b2

    @property
    def C(self) -> float:
        return self.c1 / self.c2


@dataclass(frozen=True)
class ConstantState:
    v_bar: float
    lambda_bar: float


@dataclass(frozen=True)
class DerivBundle:
    """Partial derivatives of f and g at a point (v, lambda).

    Fields are scalars or arrays following the shape of the input v.
    """

    f_v: np.ndarray | float
    f_lambda: np.ndarray | float
    f_vlambda: np.ndarray | float
    f_vv: np.ndarray | float
    f_vvv: np.ndarray | float
    g_v: np.ndarray | float
    g_lambda: np.ndarray | float
    g_vv: np.ndarray | float


@dataclass(frozen=True)
class Equilibria:
    """Constant roots of f(., lambda): zero plus the quadratic pair v1 <= v2."""

    zero: float
    v1: float
    v2: float


@dataclass(frozen=True)
class Admissibility:
    ordering_4: bool
    positivity_13: bool
    lambda_window: tuple[float, float]


def reaction_f(v, lam, P: Params):
    """f(v, lambda); broadcasts over array v."""
    return (P.a2 - P.b2 * lam / (1.0 + v) - P.c2 * v) * v


def constraint_g(v, lam, P: Params):
    """g(v, lambda); broadcasts over array v."""
    return (P.a1 - P.c1 * v) / (1.0 + v) - P.b1 * lam / (1.0 + v) ** 2


def constant_state(P: Params) -> ConstantState:
    """The positive spatially constant solution (v_bar, lambda_bar).

    Exists iff B > A > C or B < A < C with A = a1/a2, B = b1/b2, C = c1/c2;
    otherwise raises OrderingViolated.  For b1 = 0 the formulas collapse to
    v_bar = a1/c1 and lambda_bar = (a2 - c2*v_bar)(1 + v_bar)/b2.
    """
    A, B, C = P.A, P.B, P.C
    if not (B > A > C or B < A < C):
        raise OrderingViolated(
            f"need b1/b2 > a1/a2 > c1/c2 or the reverse; got B={B:g}, A={A:g}, C={C:g}"
        )
    v_bar = (P.a2 / P.c2) * (B - A) / (B - C)
    lambda_bar = (P.a2 / P.b2) * ((A - C) / (B - C)) * (1.0 + v_bar)
    return ConstantState(v_bar=v_bar, lambda_bar=lambda_bar)


def deriv_bundle(v, lam, P: Params) -> DerivBundle:
    """Partials of f and g at (v, lambda), closed form.

    Broadcasts over array v; all eight fields share v's shape.
    """
    a1, b1, c1 = P.a1, P.b1, P.c1
    a2, b2, c2 = P.a2, P.b2, P.c2
    w = 1.0 + v
    f_v = (a2 - b2 * lam / w - c2 * v) + v * (b2 * lam / w**2 - c2)
    f_lambda = -b2 * v / w
    f_vlambda = -b2 / w**2
    f_vv = 2.0 * b2 * lam / w**3 - 2.0 * c2
    f_vvv = -6.0 * b2 * lam / w**4
    g_v = -(a1 + c1) / w**2 + 2.0 * b1 * lam / w**3
    g_lambda = -b1 / w**2
    g_vv = 2.0 * (a1 + c1) / w**3 - 6.0 * b1 * lam / w**4
    return DerivBundle(
        f_v=f_v,
        f_lambda=f_lambda,
        f_vlambda=f_vlambda,
        f_vv=f_vv,
        f_vvv=f_vvv,
        g_v=g_v,
        g_lambda=g_lambda,
        g_vv=g_vv,
    )


def equilibria_of_lambda(lam: float, P: Params) -> Equilibria:
    """Constant roots of f(., lambda) = 0.

    Besides v = 0, the factor a2 - b2*lambda/(1+v) - c2*v vanishes at the
    roots of c2*v^2 - (a2 - c2)*v + (b2*lambda - a2) = 0 with discriminant
    (a2 + c2)^2 - 4*b2*c2*lambda.  Raises NoRealRoots past the fold value
    lambda = (a2 + c2)^2 / (4 b2 c2); within a relative 1e-14 band of it the
    double root is returned.
    """
    a2, b2, c2 = P.a2, P.b2, P.c2
    disc = (a2 + c2) ** 2 - 4.0 * b2 * c2 * lam
    tol = 1e-14 * (a2 + c2) ** 2
    if disc < -tol:
        raise NoRealRoots(
            f"no constant pair at lambda={lam:g}; fold at {(a2 + c2) ** 2 / (4 * b2 * c2):g}"
        )
    root = np.sqrt(max(disc, 0.0))
    v1 = ((a2 - c2) - root) / (2.0 * c2)
    v2 = ((a2 - c2) + root) / (2.0 * c2)
    return Equilibria(zero=0.0, v1=v1, v2=v2)


def admissible(P: Params) -> Admissibility:
    """Admissibility report.

    ordering_4: the ratio ordering giving a positive constant state.
    positivity_13: v_bar < (a2 - c2)/(2 c2), the band where the linearized
        reaction coefficient at the constant state is positive (requires
        a2 > c2; reported False when the ordering already fails).
    lambda_window: (a2/b2, (a2 + c2)^2/(4 b2 c2)), where the positive
        constant pair v1 < v2 exists.
    """
    ordering = (P.B > P.A > P.C) or (P.B < P.A < P.C)
    positivity = False
    if ordering and P.a2 > P.c2:
        v_bar = constant_state(P).v_bar
        positivity = v_bar < (P.a2 - P.c2) / (2.0 * P.c2)
    window = (P.a2 / P.b2, (P.a2 + P.c2) ** 2 / (4.0 * P.b2 * P.c2))
    return Admissibility(
        ordering_4=ordering, positivity_13=positivity, lambda_window=window
    )
