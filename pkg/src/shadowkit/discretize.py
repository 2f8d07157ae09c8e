"""Vertex-centered finite differences for the constrained problem.

Grid: n + 1 equally spaced nodes on [0, L].  The Neumann conditions enter
through ghost-node reflection, which doubles the off-diagonal entry in the
first and last second-difference rows and keeps the discrete operator's
row sums exactly zero.  The integral constraint is discretized by the
trapezoid rule on the same nodes, so pure cosine modes cos(k pi x / L) have
exactly zero discrete mean.

The combined unknown is (v_0..v_n, lambda); residual and Jacobian carry the
n + 1 interior/boundary PDE rows plus one constraint row.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionMismatch
from .model import Params, constant_state, constraint_g, deriv_bundle, reaction_f

__all__ = [
    "Grid",
    "State",
    "make_grid",
    "laplacian",
    "residual",
    "jacobian",
    "amplitude",
]


@dataclass(frozen=True)
class Grid:
    n: int
    L: float
    nodes: np.ndarray = field(repr=False)

    @property
    def h(self) -> float:
        return self.L / self.n

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid weights; weights @ values == integral over [0, L]."""
        w = np.full(self.n + 1, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w


@dataclass
class State:
    v: np.ndarray
    lam: float
    grid: Grid

    def copy(self) -> "State":
        return State(v=self.v.copy(), lam=self.lam, grid=self.grid)


def make_grid(n: int, L: float) -> Grid:
    if n < 2:
        raise ValueError("need at least n = 2 intervals")
    return Grid(n=n, L=L, nodes=np.linspace(0.0, L, n + 1))


def laplacian(v: np.ndarray, h: float) -> np.ndarray:
    """Second difference with ghost-node Neumann reflection at both ends."""
    ext = np.empty(v.size + 2)
    ext[1:-1] = v
    ext[0] = v[1]
    ext[-1] = v[-2]
    return (ext[:-2] - 2.0 * ext[1:-1] + ext[2:]) / (h * h)


def residual(S: State, eps: float, P: Params) -> np.ndarray:
    """Residual vector of length n + 2: PDE rows then the constraint row."""
    g = S.grid
    if S.v.shape != (g.n + 1,):
        raise DimensionMismatch(f"v has shape {S.v.shape}, grid wants ({g.n + 1},)")
    r = np.empty(g.n + 2)
    r[:-1] = eps * laplacian(S.v, g.h) + reaction_f(S.v, S.lam, P)
    r[-1] = g.weights @ constraint_g(S.v, S.lam, P)
    return r


def jacobian(S: State, eps: float, P: Params) -> np.ndarray:
    """Dense (n+2) x (n+2) linearization at (v, lambda).

    Layout: tridiagonal diffusion + reaction diagonal in the upper-left
    block, d(PDE)/d(lambda) in the last column, trapezoid-weighted
    constraint gradients in the last row.  Intended for direct inspection
    and eigenvalue work at moderate n; the solvers assemble their own
    sparse copy of the same entries.
    """
    g = S.grid
    if S.v.shape != (g.n + 1,):
        raise DimensionMismatch(f"v has shape {S.v.shape}, grid wants ({g.n + 1},)")
    n, h = g.n, g.h
    d = deriv_bundle(S.v, S.lam, P)
    J = np.zeros((n + 2, n + 2))
    idx = np.arange(n + 1)
    J[idx, idx] = -2.0 * eps / h**2 + d.f_v
    J[idx[:-1], idx[:-1] + 1] = eps / h**2
    J[idx[1:], idx[1:] - 1] = eps / h**2
    J[0, 1] = 2.0 * eps / h**2
    J[n, n - 1] = 2.0 * eps / h**2
    J[:-1, -1] = d.f_lambda
    w = g.weights
    J[-1, :-1] = w * d.g_v
    J[-1, -1] = w @ np.broadcast_to(d.g_lambda, (n + 1,))
    return J


def amplitude(S: State, k: int, P: Params) -> float:
    """Projection s = (2/L) * int (v - v_bar) cos(k pi x / L) dx (trapezoid)."""
    g = S.grid
    v_bar = constant_state(P).v_bar
    mode = np.cos(k * np.pi * g.nodes / g.L)
    return float((2.0 / g.L) * (g.weights @ ((S.v - v_bar) * mode)))
