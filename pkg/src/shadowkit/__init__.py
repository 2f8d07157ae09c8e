"""shadowkit: steady states, bifurcation branches and transition layers of a
scalar reaction-diffusion equation under a nonlocal integral constraint.

    eps v'' + f(v, lambda) = 0  on (0, L),   v'(0) = v'(L) = 0,
    int_0^L g(v, lambda) dx = 0,

with f, g rational densities in v parameterized by six positive
coefficients.  See the README for the command line entry points.
"""
from .analytic import (
    bifurcation_eps,
    classify_stability,
    layer_targets,
    maxwell_gap,
    maxwell_lambda,
    mu_dot,
    pitchfork_coeffs,
    pitchfork_k2_projection,
    sign_chart,
)
from .continuation import (
    Branch,
    BranchPoint,
    branch_from_bifurcation,
    detect_bifurcations,
    extend_to_small_eps,
    fit_pitchfork,
    merge_halves,
)
from .discretize import Grid, State, amplitude, jacobian, make_grid, residual
from .eigen import (
    is_stable,
    is_stable_fixed_lambda,
    leading_spectrum,
    linearized_matrix,
    stability_spectrum,
)
from .layer import (
    Heteroclinic,
    LayerReport,
    compose_ansatz,
    constraint_I,
    heteroclinic,
    tail_rates,
    layer_solve,
    potential,
    residual_G,
)
from .model import (
    Params,
    admissible,
    constant_state,
    constraint_g,
    deriv_bundle,
    equilibria_of_lambda,
    reaction_f,
)
from .solve import newton, relax_oracle, solve_fixed_lambda

__version__ = "0.1.0"

__all__ = [
    "Params",
    "Grid",
    "State",
    "Branch",
    "BranchPoint",
    "Heteroclinic",
    "LayerReport",
    "admissible",
    "amplitude",
    "bifurcation_eps",
    "branch_from_bifurcation",
    "classify_stability",
    "compose_ansatz",
    "constant_state",
    "constraint_I",
    "constraint_g",
    "deriv_bundle",
    "detect_bifurcations",
    "equilibria_of_lambda",
    "extend_to_small_eps",
    "fit_pitchfork",
    "heteroclinic",
    "tail_rates",
    "is_stable",
    "is_stable_fixed_lambda",
    "jacobian",
    "layer_solve",
    "layer_targets",
    "leading_spectrum",
    "linearized_matrix",
    "make_grid",
    "maxwell_gap",
    "maxwell_lambda",
    "merge_halves",
    "mu_dot",
    "newton",
    "pitchfork_coeffs",
    "pitchfork_k2_projection",
    "potential",
    "reaction_f",
    "relax_oracle",
    "residual",
    "residual_G",
    "sign_chart",
    "solve_fixed_lambda",
    "stability_spectrum",
]
