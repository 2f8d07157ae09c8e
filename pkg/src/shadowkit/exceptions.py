"""Error taxonomy used across the package.

Everything derives from :class:`ShadowkitError` so callers can catch broadly.
The CLI maps these onto exit codes: configuration problems -> 1, model
preconditions -> 2, solver/numerical failures -> 3.
"""
from __future__ import annotations


class ShadowkitError(Exception):
    """Base class for all package errors."""


# --- model / analytic preconditions -----------------------------------------

class OrderingViolated(ShadowkitError):
    """No positive constant state: the coefficient ratios are not ordered."""


class NoRealRoots(ShadowkitError):
    """The constant-equilibrium quadratic has no real roots at this lambda."""


class NotPositive(ShadowkitError):
    """A quantity that must be positive (e.g. a bifurcation value) is not."""


class RequiresB1Zero(ShadowkitError):
    """Closed-form route only available for b1 = 0."""


class Degenerate(ShadowkitError):
    """A classification sits on a sign boundary within tolerance."""


class HypothesisFailed(ShadowkitError):
    """A structural hypothesis on the coefficients does not hold."""


class X0OutOfRange(ShadowkitError):
    """Requested interface position lies outside the admissible interval."""


# --- discretization / solvers ------------------------------------------------

class DimensionMismatch(ShadowkitError):
    """Array lengths inconsistent with the grid."""


class SingularJacobian(ShadowkitError):
    """Linearization (numerically) singular; typically near a bifurcation."""


class NoConvergence(ShadowkitError):
    """Iteration exhausted without meeting the tolerance."""


class LeftDomain(ShadowkitError):
    """Damped steps could not keep the iterate inside 1 + v > 1/2."""


class Blowup(ShadowkitError):
    """Time relaxation exceeded the a-priori solution bound."""


# --- eigen -------------------------------------------------------------------

class ConvergenceFailure(ShadowkitError):
    """The eigenvalue backend did not converge."""


class Indeterminate(ShadowkitError):
    """Leading spectrum too close to the imaginary axis to call."""


# --- continuation ------------------------------------------------------------

class SeedFailure(ShadowkitError):
    """Could not produce a converged first point off the constant state."""


class InsufficientData(ShadowkitError):
    """Not enough branch points inside the requested fit window."""


# --- layer -------------------------------------------------------------------

class Unbalanced(ShadowkitError):
    """Connection construction requires the equal-area balance to hold."""


class NegativeEnergy(ShadowkitError):
    """First-integral radicand went negative: no monotone connection."""


class SeedRejected(ShadowkitError):
    """Sharp-interface seed was rejected by the corrector."""


# --- cli ---------------------------------------------------------------------

class ConfigError(ShadowkitError):
    """Malformed or incomplete run configuration."""


# Families the CLI uses to choose exit codes.
MODEL_ERRORS = (
    OrderingViolated,
    NoRealRoots,
    NotPositive,
    RequiresB1Zero,
    Degenerate,
    HypothesisFailed,
    X0OutOfRange,
)

SOLVER_ERRORS = (
    DimensionMismatch,
    SingularJacobian,
    NoConvergence,
    LeftDomain,
    Blowup,
    ConvergenceFailure,
    Indeterminate,
    SeedFailure,
    InsufficientData,
    Unbalanced,
    NegativeEnergy,
    SeedRejected,
)
