"""Argument checks shared by the estimators and the functional API."""

import numbers

import numpy as np

VARIANTS = ("original", "enhanced")


def check_variant(variant):
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    return variant


def check_vigilance(vigilance):
    if not isinstance(vigilance, numbers.Real) or not 0.0 < float(vigilance) <= 1.0:
        raise ValueError(f"vigilance must lie in (0, 1], got {vigilance!r}")
    return float(vigilance)


def check_tolerances(tolerances, n_features):
    """Return tolerances as a float array of length ``n_features``.

    A scalar is broadcast to every feature.
    """
    if tolerances is None:
        raise ValueError("tolerances must be given")
    tol = np.asarray(tolerances, dtype=float)
    if tol.ndim == 0:
        tol = np.full(n_features, float(tol))
    if tol.ndim != 1 or tol.shape[0] != n_features:
        raise ValueError(
            f"dimension mismatch: expected {n_features} tolerances, got {tol.size}"
        )
    if not np.all(np.isfinite(tol)) or np.any(tol < 0):
        raise ValueError("tolerances must be finite and non-negative")
    return tol


def check_positive_int(value, name):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_same_length(a, b, what="sequences"):
    if len(a) != len(b):
        raise ValueError(f"{what} differ in length: {len(a)} vs {len(b)}")
