"""Recover dynamical laws as block-sparse tensor trains."""

from ._dynlaw import (
    ConfigError,
    Dictionary,
    DimensionError,
    DomainError,
    Error,
    InputError,
    Model,
    NumericalError,
    SelectionTable,
    System,
    TrainOptions,
    __version__,
    c1_bound,
    c2_factor,
    corollary_rank_bound,
    residuum,
    run_config,
    sample,
    train,
    truncated_dipole_error,
)

__all__ = [
    "ConfigError",
    "Dictionary",
    "DimensionError",
    "DomainError",
    "Error",
    "InputError",
    "Model",
    "NumericalError",
    "SelectionTable",
    "System",
    "TrainOptions",
    "__version__",
    "c1_bound",
    "c2_factor",
    "corollary_rank_bound",
    "residuum",
    "run_config",
    "sample",
    "train",
    "truncated_dipole_error",
]
