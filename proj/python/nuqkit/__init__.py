"""Python bindings for the nuq uncertainty-quantification toolkit."""

from ._nuq import (
    ConfigError,
    Histogram,
    IoError,
    NumericalError,
    ReducedModel,
    Surrogate,
    SyntheticModelSpec,
    __version__,
    converge_sampling,
    fit_kpca,
    fit_pca,
    fit_surrogate,
    histogram,
    kl_divergence,
    kl_reference,
    mode_split,
    propagate,
    sample_inputs,
    spearman,
    summary_stats,
    synthetic_crash,
)

__all__ = [
    "ConfigError",
    "Histogram",
    "IoError",
    "NumericalError",
    "ReducedModel",
    "Surrogate",
    "SyntheticModelSpec",
    "__version__",
    "converge_sampling",
    "fit_kpca",
    "fit_pca",
    "fit_surrogate",
    "histogram",
    "kl_divergence",
    "kl_reference",
    "mode_split",
    "propagate",
    "sample_inputs",
    "spearman",
    "summary_stats",
    "synthetic_crash",
]
