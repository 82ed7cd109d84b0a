"""Maximum-likelihood linear fits to binned Poisson counts with the Cash statistic."""

from .cash import cash_from_means, cash_standard, cash_terms, poisson_means_standard
from .dataset import AUTO, Bin, BinnedDataset, Gap, build_dataset, from_edges, nonzero_bins, uniform_dataset
from .extended import ExtendedFit, Fallback, ModelKind, fit_constant, fit_extended, fit_pivot_a, fit_pivot_b
from .solver import (
    F,
    F_infinity,
    NoAcceptableSolution,
    SolverDiagnostics,
    StandardFit,
    classify_acceptability,
    find_F_zeros,
    find_g_zeros,
    fit_standard,
    g,
    lambda_of_a,
)

__version__ = "0.1.0"

__all__ = [
    "AUTO",
    "Bin",
    "BinnedDataset",
    "Gap",
    "build_dataset",
    "from_edges",
    "uniform_dataset",
    "nonzero_bins",
    "poisson_means_standard",
    "cash_from_means",
    "cash_terms",
    "cash_standard",
    "g",
    "F",
    "F_infinity",
    "find_g_zeros",
    "find_F_zeros",
    "lambda_of_a",
    "classify_acceptability",
    "fit_standard",
    "StandardFit",
    "NoAcceptableSolution",
    "SolverDiagnostics",
    "ModelKind",
    "Fallback",
    "ExtendedFit",
    "fit_pivot_a",
    "fit_pivot_b",
    "fit_constant",
    "fit_extended",
]
