"""Porous-media flow and transport toolkit (compiled core in porous._core)."""

from porous._core import (
    Error,
    InvalidArgument,
    NumericalError,
    SpherePack,
    alpha_p,
    analytic_solution,
    bar_gamma_exact,
    bar_gamma_p,
    bar_gamma_p_numeric,
    blake_kozeny,
    count_overlaps,
    darcy_manufactured_errors,
    default_reference_parameters,
    duct_mean_velocity,
    figure_ids,
    hexagonal_pack,
    max_stable_pe,
    min_degree_for_pe,
    normalize_config,
    oscillation_measure,
    pack_flow,
    random_pack,
    reduced_gradient,
    run,
    solve_bvp,
    truncation_error,
)

__version__ = "0.3.0"
