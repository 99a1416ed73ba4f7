"""Low-coherence input design for sparse system identification.

Joint design of an identification input (a Toeplitz regressor matching a
desired information matrix) and a coordinate transformation with low mutual
coherence, plus the sparse estimators and Monte-Carlo benchmark built on top
of them. The heavy lifting lives in the compiled extension `lcid._core`.
"""

from ._core import (
    DesignResult,
    SparseEstimate,
    add_white_floor,
    bandpass_autocorrelation,
    build_regressor,
    coherence_condition,
    cross_validate,
    desired_sensitivity,
    filter_fixed_denominator,
    fim,
    generate_theta0,
    gram_target_from_spectrum,
    ladmm_lasso,
    lcid_estimate,
    ls_refit,
    mutual_coherence,
    nearest_psd,
    nrmse,
    omp,
    order_select_ls,
    orthogonal_factor,
    project_l1_ball,
    prox_inf_norm,
    psd_sqrt,
    realize_input_fdm,
    recover_input,
    recovery_bound,
    run_benchmark,
    run_lcid,
    snr_to_sigma2,
    toeplitz_ls_fit,
    transformed_ls,
    v_app,
)

__version__ = "0.1.0"

__all__ = [
    "DesignResult",
    "SparseEstimate",
    "add_white_floor",
    "bandpass_autocorrelation",
    "build_regressor",
    "coherence_condition",
    "cross_validate",
    "desired_sensitivity",
    "filter_fixed_denominator",
    "fim",
    "generate_theta0",
    "gram_target_from_spectrum",
    "ladmm_lasso",
    "lcid_estimate",
    "ls_refit",
    "mutual_coherence",
    "nearest_psd",
    "nrmse",
    "omp",
    "order_select_ls",
    "orthogonal_factor",
    "project_l1_ball",
    "prox_inf_norm",
    "psd_sqrt",
    "realize_input_fdm",
    "recover_input",
    "recovery_bound",
    "run_benchmark",
    "run_lcid",
    "snr_to_sigma2",
    "toeplitz_ls_fit",
    "transformed_ls",
    "v_app",
]
