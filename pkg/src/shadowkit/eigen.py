"""Linear stability of discrete steady states.

The time-dependent problem pairs the parabolic equation for v with the
algebraic (instantaneous) constraint, so the linearization is a
differential-algebraic pencil

    M x = eta * B x,      B = diag(1, ..., 1, 0),

where M is the bordered steady-state Jacobian: the constraint row carries
no time derivative.  The pencil has n + 1 finite eigenvalues when the
constraint row depends on lambda, and n when it does not (the extra
infinite pair absorbs the constant mode that the constraint removes).
Stability is decided by the finite part of the spectrum alone.

A fixed-lambda variant diagonalizes only the PDE block, which is
self-adjoint in the trapezoid inner product and is handled in symmetrized
banded form.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg

from .discretize import State, jacobian
from .exceptions import ConvergenceFailure, Indeterminate
from .model import Params, deriv_bundle

__all__ = [
    "linearized_matrix",
    "leading_spectrum",
    "stability_spectrum",
    "is_stable",
    "fixed_lambda_spectrum",
    "is_stable_fixed_lambda",
]

# Relative beta cutoff separating the pencil's finite eigenvalues from the
# infinite ones produced by the algebraic row.
_BETA_CUT = 1e-12


def linearized_matrix(S: State, eps: float, P: Params) -> np.ndarray:
    """Dense bordered linearization at a state; alias of the assembled Jacobian."""
    return jacobian(S, eps, P)


def _sort_desc(vals: np.ndarray) -> np.ndarray:
    order = np.lexsort((-vals.imag, -vals.real))
    return vals[order]


def leading_spectrum(m: np.ndarray, count: int) -> np.ndarray:
    """Eigenvalues of a general dense matrix, sorted by descending real part
    (ties by descending imaginary part); returns the first ``count``."""
    try:
        vals = scipy.linalg.eig(m, right=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return _sort_desc(vals)[:count]


def stability_spectrum(S: State, eps: float, P: Params) -> np.ndarray:
    """Finite eigenvalues of the constrained pencil at a state, sorted
    by descending real part.

    Computed by the QZ factorization of (M, B); generalized eigenvalues
    whose beta component vanishes (relative to the largest) are the
    infinite ones belonging to the algebraic constraint and are dropped.
    """
    M = jacobian(S, eps, P)
    m = M.shape[0]
    B = np.eye(m)
    B[-1, -1] = 0.0
    try:
        alpha, beta = scipy.linalg.eig(M, B, right=False, homogeneous_eigvals=True)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    keep = np.abs(beta) > _BETA_CUT * float(np.max(np.abs(beta)))
    return _sort_desc(alpha[keep] / beta[keep])


def is_stable(S: State, eps: float, P: Params, margin: float = 1e-8) -> bool:
    """True iff the largest finite real part is <= -margin.

    Raises Indeterminate when the leading real part sits within +/-margin
    of the axis, rather than guessing.
    """
    lead = float(np.max(stability_spectrum(S, eps, P).real))
    if lead <= -margin:
        return True
    if lead >= margin:
        return False
    raise Indeterminate(f"leading real part {lead:.3e} within +/-{margin:.1e} of zero")


def fixed_lambda_spectrum(v: np.ndarray, lam: float, eps: float, P: Params) -> np.ndarray:
    """Spectrum of the fixed-lambda linearization eps D2 + diag(f_v).

    The operator is self-adjoint in the trapezoid inner product; the
    similarity transform by sqrt(weights) makes the banded matrix exactly
    symmetric, so the eigenvalues are real.  Returned descending.
    """
    v = np.asarray(v, dtype=float)
    n = v.size - 1
    h = P.L / n
    f_v = deriv_bundle(v, lam, P).f_v
    band = np.zeros((2, n + 1))
    band[0, 1:] = eps / h**2
    band[0, 1] = np.sqrt(2.0) * eps / h**2
    band[0, n] = np.sqrt(2.0) * eps / h**2
    band[1, :] = -2.0 * eps / h**2 + f_v
    try:
        vals = scipy.linalg.eig_banded(band, lower=False, eigvals_only=True)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return vals[::-1]


def is_stable_fixed_lambda(
    v: np.ndarray, lam: float, eps: float, P: Params, margin: float = 1e-8
) -> bool:
    lead = float(fixed_lambda_spectrum(v, lam, eps, P)[0])
    if lead <= -margin:
        return True
    if lead >= margin:
        return False
    raise Indeterminate(f"leading eigenvalue {lead:.3e} within +/-{margin:.1e} of zero")
