"""Pseudospectral lab for fractional Schrodinger ground states on a periodic box."""
from .grid import (
    Field, Grid, frac_laplacian, hs_norm_sq, inner, inverse_transform, lp_norm, make_grid,
    quadrature, transform, translate,
)
from .problem import (
    HypothesisParams, HypothesisWarning, PotentialFamily, ProblemSpec, build_problem,
    check_hypotheses, limit_problem, read_field, write_field,
)
from .energy import (
    DegenerateNonlinearity, barycenter, energy, energy_value, grad, nehari_project,
    nehari_residual,
)
from .solvers import (
    SolverConfig, SolveReport, fit_decay_exponent, gaussian_guess, solve_ground_state,
    solve_odd, track_bumps,
)
from .twobump import (
    ScanTable, c0_upper_bound, convolution_check, energy_scan, interaction, interaction_scan,
    make_two_bump, superadditivity_check,
)

__version__ = "0.1.0"
