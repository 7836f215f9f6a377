"""Gaussian process maximum likelihood estimation (C++ core)."""

import json

import numpy as np

from ._gpmle import (
    ConfigError,
    Error,
    FitResult,
    FittedGP,
    KernelFamily,
    KernelSpec,
    ParamVector,
    area_under_ecdf,
    conditioning,
    corpus_dataset,
    corpus_ids,
    evaluate,
    function_names,
    nll,
    nll_grad,
    preset,
    profile_mean_var,
)
from ._gpmle import fit as _fit

__all__ = [
    "ConfigError",
    "Error",
    "FitResult",
    "FittedGP",
    "KernelFamily",
    "KernelSpec",
    "ParamVector",
    "area_under_ecdf",
    "conditioning",
    "corpus_dataset",
    "corpus_ids",
    "evaluate",
    "fit",
    "function_names",
    "kernel",
    "nll",
    "nll_grad",
    "preset",
    "profile_mean_var",
]


def kernel(family, dim, nu=None):
    """KernelSpec from a family name: matern, squared_exponential, rational_quadratic."""
    if family == "matern":
        return KernelSpec.matern(dim, 2.5 if nu is None else nu)
    if family == "squared_exponential":
        return KernelSpec.squared_exponential(dim)
    if family == "rational_quadratic":
        return KernelSpec.rational_quadratic(dim, 1.0 if nu is None else nu)
    raise ValueError(f"unknown kernel family {family!r}")


def fit(X, z, scheme="improved", spec=None):
    """Fit by maximum likelihood. `scheme` is a preset name or a scheme dict."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    z = np.asarray(z, dtype=float).ravel()
    if spec is None:
        spec = KernelSpec.matern(X.shape[1])
    if isinstance(scheme, str):
        scheme = {"preset": scheme}
    return _fit(json.dumps(scheme), spec, X, z)
