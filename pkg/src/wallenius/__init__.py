"""Wallenius noncentral hypergeometric likelihood and inference.

Figures live in :mod:`wallenius.plots` (imported on demand, it pulls in
matplotlib) and the command-line tool in :mod:`wallenius.cli`.
"""

__version__ = "0.1.0"

from .exceptions import (BoundaryIntervalError, CapacityError, DomainError,
                         FlatLikelihoodError, ParseError, SampleSizeError, ValidationError,
                         WalleniusError)
from .core import (WEIGHT_FLOOR, DrawOutcome, LogDensity, UrnSpec, WeightVector, log_likelihood,
                   log_likelihood_many, log_pmf, mix64, pmf, pmf_oracle, simulate_draw,
                   simulate_draws)
from .data import (PER_UNIT, SHARED, Dataset, Table, dumps_results, parse_dataset,
                   read_chain_csv, simulate_dataset, write_chain_csv, write_dataset,
                   write_results)
from .inference import (ConfidenceRegion, GridEvaluation, MleResult, WilksInterval,
                        evaluate_grid, fit_mle, likelihood_region, lr_threshold, wilks_interval)
from .bootstrap import (BootstrapDistribution, Replicate, enumerate_support, ideal_bootstrap,
                        parametric_bootstrap, support_size)
from .swm import (Chain, ChainDiagnostics, CredibleInterval, SwmConfig, chain_diagnostics,
                  credible_intervals, effective_sample_size, run_swm)

__all__ = [
    "BoundaryIntervalError",
    "CapacityError",
    "DomainError",
    "FlatLikelihoodError",
    "ParseError",
    "SampleSizeError",
    "ValidationError",
    "WalleniusError",
    "WEIGHT_FLOOR",
    "DrawOutcome",
    "LogDensity",
    "UrnSpec",
    "WeightVector",
    "log_likelihood",
    "log_likelihood_many",
    "log_pmf",
    "mix64",
    "pmf",
    "pmf_oracle",
    "simulate_draw",
    "simulate_draws",
    "PER_UNIT",
    "SHARED",
    "Dataset",
    "Table",
    "dumps_results",
    "parse_dataset",
    "read_chain_csv",
    "simulate_dataset",
    "write_chain_csv",
    "write_dataset",
    "write_results",
    "ConfidenceRegion",
    "GridEvaluation",
    "MleResult",
    "WilksInterval",
    "evaluate_grid",
    "fit_mle",
    "likelihood_region",
    "lr_threshold",
    "wilks_interval",
    "BootstrapDistribution",
    "Replicate",
    "enumerate_support",
    "ideal_bootstrap",
    "parametric_bootstrap",
    "support_size",
    "Chain",
    "ChainDiagnostics",
    "CredibleInterval",
    "SwmConfig",
    "chain_diagnostics",
    "credible_intervals",
    "effective_sample_size",
    "run_swm",
]
