"""Shared fixtures.

Two reference instances are used throughout:

* ``PA`` has all six coefficients positive (b1 > 0) and constant state
  (v_bar, lambda_bar) = (1, 3).
* ``PB`` has b1 = 0 and constant state (1, 6); it is the instance with
  closed-form pitchfork and layer quantities, so most oracle numbers
  below are hand-evaluated for it.

Branch tracing and the connecting-orbit construction are expensive enough
to share, hence the session-scoped fixtures.
"""
import pytest

from shadowkit import Params, branch_from_bifurcation, heteroclinic, maxwell_lambda

PA = Params(a1=2, b1=1.2, c1=0.2, a2=4, b2=2, c2=1, L=1.0)
PB = Params(a1=1, b1=0, c1=1, a2=4, b2=1, c2=1, L=1.0)
# same b1=0 family as PB but with t = 1.06 in (c2, first chart root):
# the branch turns right and is unstable.
PU = Params(a1=1, b1=0, c1=1, a2=3.12, b2=1, c2=1, L=1.0)
# constant state exists (v_bar=2) but 2 > (a2-c2)/(2c2) = 1.5, so there are
# no positive bifurcation values.
PNEG = Params(a1=2, b1=0, c1=1, a2=4, b2=1, c2=1, L=1.0)


@pytest.fixture(scope="session")
def pa():
    return PA


@pytest.fixture(scope="session")
def pb():
    return PB


@pytest.fixture(scope="session")
def pu():
    return PU


@pytest.fixture(scope="session")
def pneg():
    return PNEG


@pytest.fixture(scope="session")
def lam_star():
    return maxwell_lambda(PB)


@pytest.fixture(scope="session")
def het(lam_star):
    return heteroclinic(lam_star, PB)


@pytest.fixture(scope="session")
def pb_branch():
    """Mode-1 half-branches of PB, fine enough steps for quadratic fits."""
    return branch_from_bifurcation(1, PB, s_max=0.05, step=2e-3, n=400)


@pytest.fixture(scope="session")
def pu_branch():
    return branch_from_bifurcation(1, PU, s_max=0.05, step=2e-3, n=400)
