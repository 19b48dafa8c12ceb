"""Local projections with greedy high-dimensional control selection."""

from .dgp import (
    DfmDgpSpec,
    Section3Design,
    VarDgpSpec,
    alternating_decay_vector,
    build_section3_coefficients,
    section3_lp_spec,
    simulate_dfm,
    simulate_var,
    toeplitz_power_sigma,
    true_dfm_irf,
    true_reduced_form_irf,
)
from .hac import HacConfig, auto_bandwidth, hac_variance, newey_west
from .linalg import OlsFit, gram_schmidt_extend, ols_fit, project_out
from .lp import (
    CONVENTIONAL_LP,
    DOUBLE_OGA,
    METHODS,
    IrfResult,
    LpDataset,
    LpEstimate,
    LpSpec,
    TimeSeriesMatrix,
    build_lp_dataset,
    conventional_lp,
    double_oga_lp,
    estimate_irf,
    estimate_lp,
)
from .lpdid import (
    LpDidEstimate,
    LpDidResult,
    LpDidSpec,
    PanelDataset,
    lpdid_estimate,
    restrict_sample,
)
from .montecarlo import (
    McDesign,
    McReport,
    aggregate_records,
    run_monte_carlo,
    section3_mc_design,
)
from .selection import (
    OgaConfig,
    SelectionPath,
    hdaic,
    max_steps,
    mu_score,
    oga_hdaic_select,
    oga_order,
    select_c_star,
    select_hdaic,
)

__version__ = "0.1.0"

__all__ = [
    "CONVENTIONAL_LP",
    "DOUBLE_OGA",
    "METHODS",
    "DfmDgpSpec",
    "HacConfig",
    "IrfResult",
    "LpDataset",
    "LpDidEstimate",
    "LpDidResult",
    "LpDidSpec",
    "LpEstimate",
    "LpSpec",
    "McDesign",
    "McReport",
    "OgaConfig",
    "OlsFit",
    "PanelDataset",
    "Section3Design",
    "SelectionPath",
    "TimeSeriesMatrix",
    "VarDgpSpec",
    "aggregate_records",
    "alternating_decay_vector",
    "auto_bandwidth",
    "build_lp_dataset",
    "build_section3_coefficients",
    "conventional_lp",
    "double_oga_lp",
    "estimate_irf",
    "estimate_lp",
    "gram_schmidt_extend",
    "hac_variance",
    "hdaic",
    "lpdid_estimate",
    "max_steps",
    "mu_score",
    "newey_west",
    "oga_hdaic_select",
    "oga_order",
    "ols_fit",
    "project_out",
    "restrict_sample",
    "run_monte_carlo",
    "section3_lp_spec",
    "section3_mc_design",
    "select_c_star",
    "select_hdaic",
    "simulate_dfm",
    "simulate_var",
    "toeplitz_power_sigma",
    "true_dfm_irf",
    "true_reduced_form_irf",
]
