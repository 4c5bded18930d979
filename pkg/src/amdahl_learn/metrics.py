"""Score-domain error metrics."""
from __future__ import annotations

import numpy as np

from .errors import DomainError


def absolute_percentage_errors(actual, predicted) -> np.ndarray:
    """Per-row ``100 * |actual - predicted| / actual``.

    Predictions that are NaN (failed predictions) count as 100% error.
    """
    actual = np.asarray(actual, dtype=float).reshape(-1)
    predicted = np.asarray(predicted, dtype=float).reshape(-1)
    if actual.shape != predicted.shape:
        raise DomainError(f"length mismatch: {actual.size} actual vs {predicted.size} predicted")
    if actual.size == 0:
        raise DomainError("MAPE needs at least one value")
    if not np.all(np.isfinite(actual) & (actual > 0)):
        raise DomainError("actual values must be positive")
    ape = 100.0 * np.abs(actual - predicted) / actual
    return np.where(np.isnan(predicted), 100.0, ape)


def mape(actual, predicted) -> float:
    """Mean absolute percentage error, in percent."""
    return float(np.mean(absolute_percentage_errors(actual, predicted)))


def accuracy_from_mape(mape_pct: float) -> float:
    return 100.0 - mape_pct
