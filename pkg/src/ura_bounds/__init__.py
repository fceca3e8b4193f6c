"""Finite-blocklength achievability bounds for unsourced random access
over the (binary-input) Gaussian multiple-access channel."""

from .gaussian_bound import (
    PowerParams,
    RegionParams,
    SystemParams,
    TiltParams,
    ebno_db,
    p0_gaussian,
    pe_bound_gaussian,
    power_for_ebno,
)
from .binary_bound import p0_binary, pe_bound_binary
from .numerics import (
    RhoDist,
    SymMat,
    chi_square_upper_tail,
    log_binomial,
    log_sum_exp,
    logdet_pd,
    rho_distribution,
)
from .optimizer import (
    BoundResult,
    OptimizerSettings,
    SearchFailure,
    TermResult,
    ebno_sweep,
    find_min_ebno,
    optimize_term_t,
    pe_bound_at_power,
)

__version__ = "0.1.0"

__all__ = [
    "BoundResult",
    "OptimizerSettings",
    "PowerParams",
    "RegionParams",
    "RhoDist",
    "SearchFailure",
    "SymMat",
    "SystemParams",
    "TermResult",
    "TiltParams",
    "chi_square_upper_tail",
    "ebno_db",
    "ebno_sweep",
    "find_min_ebno",
    "log_binomial",
    "log_sum_exp",
    "logdet_pd",
    "optimize_term_t",
    "p0_binary",
    "p0_gaussian",
    "pe_bound_at_power",
    "pe_bound_binary",
    "pe_bound_gaussian",
    "power_for_ebno",
    "rho_distribution",
]
