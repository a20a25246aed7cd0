"""State-space core: models, interconnections, Riccati design and norms."""
from .affine import solve_affine
from .chi2 import chi2_quantile, ncx2_cdf, ncx2_quantile
from .connect import (
    add,
    block_diagonal,
    closed_loop_matrix,
    diagonal_transfer,
    hstack,
    identity,
    invert_io,
    minimal_realization,
    negate,
    product,
    scale,
    series_connect,
    static_gain,
    subtract,
    transfer_matrix,
    transfer_to_statespace,
    vstack,
)
from .norms import (
    freq_response,
    freq_response_grid,
    frequency_grid,
    h2_norm,
    hinf_norm,
    impulse_response,
    is_schur,
    max_singular_values,
    require_stable,
    spectral_radius,
)
from .riccati import GainReport, dare_residual, kalman_gain, lq_gain, riccati_map, solve_dare
from .statespace import LtiFilter, NoiseSpec, Signal, StateSpaceModel, as_matrix, as_vector, simulate, step_lti

__all__ = [
    "StateSpaceModel",
    "NoiseSpec",
    "Signal",
    "LtiFilter",
    "GainReport",
    "as_matrix",
    "as_vector",
    "step_lti",
    "simulate",
    "series_connect",
    "product",
    "add",
    "subtract",
    "negate",
    "scale",
    "static_gain",
    "identity",
    "hstack",
    "vstack",
    "block_diagonal",
    "invert_io",
    "closed_loop_matrix",
    "minimal_realization",
    "transfer_to_statespace",
    "transfer_matrix",
    "diagonal_transfer",
    "solve_dare",
    "riccati_map",
    "dare_residual",
    "kalman_gain",
    "lq_gain",
    "hinf_norm",
    "h2_norm",
    "freq_response",
    "freq_response_grid",
    "frequency_grid",
    "max_singular_values",
    "impulse_response",
    "is_schur",
    "require_stable",
    "spectral_radius",
    "chi2_quantile",
    "ncx2_cdf",
    "ncx2_quantile",
    "solve_affine",
]
