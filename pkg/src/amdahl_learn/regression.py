"""Ordinary least squares on the reciprocal design, plus fraction recovery."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import scipy.linalg

from .errors import DomainError, NumericalError, PredictionError, RankDeficiencyWarning
from .features import DesignMatrix, ModelSpec, design_from_values
from .metrics import mape
from .model_core import ResourceVector

DEGENERATE_STD = 1e-12
FRACTION_SLACK = 0.05
RANK_RTOL = np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class Scaler:
    """Z-score parameters for the non-intercept columns."""

    mean: np.ndarray
    std: np.ndarray
    degenerate: np.ndarray
    n: int

    @classmethod
    def fit(cls, X: np.ndarray) -> "Scaler":
        feats = X[:, 1:]
        mean = feats.mean(axis=0)
        std = feats.std(axis=0)
        degenerate = std < DEGENERATE_STD
        return cls(mean=mean, std=np.where(degenerate, 1.0, std), degenerate=degenerate, n=X.shape[0])

    @classmethod
    def identity(cls, n_features: int, n: int = 0) -> "Scaler":
        return cls(np.zeros(n_features), np.ones(n_features), np.zeros(n_features, dtype=bool), n)

    def transform(self, X: np.ndarray) -> np.ndarray:
        out = np.array(X, dtype=float, copy=True)
        out[:, 1:] = (out[:, 1:] - self.mean) / self.std
        return out

    def inverse_transform(self, Xs: np.ndarray) -> np.ndarray:
        out = np.array(Xs, dtype=float, copy=True)
        out[:, 1:] = out[:, 1:] * self.std + self.mean
        return out

    def unscale_coefficients(self, beta: np.ndarray) -> np.ndarray:
        raw = np.empty_like(beta)
        raw[1:] = beta[1:] / self.std
        raw[0] = beta[0] - np.dot(raw[1:], self.mean)
        return raw


@dataclass(frozen=True, eq=False)
class FittedModel:
    spec: ModelSpec
    coefficients_raw: np.ndarray
    coefficients_scaled: np.ndarray
    scaler: Scaler
    rank: int
    condition: float
    training_mape: float
    diagnostics: tuple[str, ...] = field(default=())

    @property
    def labels(self) -> list[str]:
        return self.spec.column_labels

    def features(self, values: np.ndarray) -> np.ndarray:
        values = np.atleast_2d(np.asarray(values, dtype=float))
        return np.hstack([np.ones((values.shape[0], 1)), self.spec.ratios(values)])

    def inverse_scores(self, values: np.ndarray) -> np.ndarray:
        """Unchecked Ŷ for each configuration row; may be nonpositive."""
        return self.features(values) @ self.coefficients_raw

    def inverse_scores_scaled(self, values: np.ndarray) -> np.ndarray:
        return self.scaler.transform(self.features(values)) @ self.coefficients_scaled

    def scores(self, values: np.ndarray) -> np.ndarray:
        """Predicted scores with NaN wherever Ŷ ≤ 0 or is not finite."""
        yhat = self.inverse_scores(values)
        ok = np.isfinite(yhat) & (yhat > 0)
        out = np.full(yhat.shape, np.nan)
        np.divide(1.0, yhat, out=out, where=ok)
        return out


def _named_rank_loss(Xs: np.ndarray, rank: int, labels) -> list[str]:
    if rank >= Xs.shape[1]:
        return []
    _, _, piv = scipy.linalg.qr(Xs, mode="economic", pivoting=True)
    return [labels[j] for j in sorted(piv[rank:])]


def fit(design: DesignMatrix, spec: ModelSpec | None = None, normalize: bool = True) -> FittedModel:
    """Least-squares coefficients for ``y ≈ X @ alpha``.

    Non-intercept columns are z-scored on the given rows before solving with a
    column-pivoted complete orthogonal factorisation (minimum-norm solution
    when rank deficient).  Constant columns or a rank-deficient design produce
    a :class:`RankDeficiencyWarning`, not an error.
    """
    X, y = np.asarray(design.X, dtype=float), np.asarray(design.y, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1:
        raise DomainError("cannot fit an empty design")
    if X.shape[0] != y.shape[0]:
        raise DomainError(f"design has {X.shape[0]} rows but target has {y.shape[0]}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise DomainError("design and target must be finite")
    n, p = X.shape
    labels = list(design.labels)

    scaler = Scaler.fit(X) if normalize else Scaler.identity(p - 1, n)
    Xs = scaler.transform(X)
    try:
        beta, _, rank, _ = scipy.linalg.lstsq(Xs, y, cond=RANK_RTOL * max(n, p), lapack_driver="gelsy")
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise NumericalError(f"least-squares solve failed: {exc}") from exc
    rank = int(rank)
    sv = scipy.linalg.svdvals(Xs)
    condition = float(sv[0] / sv[rank - 1]) if rank > 0 and sv[rank - 1] > 0 else float("inf")

    diagnostics = []
    constant = X[:, 1:].std(axis=0) < DEGENERATE_STD
    for j in np.flatnonzero(constant):
        diagnostics.append(
            f"feature column {labels[j + 1]!r} is constant over the {n} training rows; "
            "its effect on performance cannot be learned from this data"
        )
    if rank < p:
        dropped = _named_rank_loss(Xs, rank, labels)
        diagnostics.append(
            f"design matrix is rank deficient (rank {rank} < {p} columns); "
            f"unidentifiable column(s): {', '.join(map(repr, dropped))}; using the minimum-norm solution"
        )
    for msg in diagnostics:
        warnings.warn(msg, RankDeficiencyWarning, stacklevel=2)

    raw = scaler.unscale_coefficients(beta)
    yhat = X @ raw
    ok = yhat > 0
    pred = np.full(n, np.nan)
    np.divide(1.0, yhat, out=pred, where=ok)
    train_mape = mape(1.0 / y, pred)
    if spec is None:
        spec = design.spec
    return FittedModel(spec=spec, coefficients_raw=raw, coefficients_scaled=beta, scaler=scaler,
                       rank=rank, condition=condition, training_mape=train_mape,
                       diagnostics=tuple(diagnostics))


def fit_dataset(spec: ModelSpec, data, normalize: bool = True) -> FittedModel:
    """Resolve the baseline, build the design and fit it."""
    data = data.project(spec.schema)
    spec = spec.resolve_baseline(data.values)
    return fit(design_from_values(spec, data.values, data.scores), spec, normalize=normalize)


def _config_values(model: FittedModel, config) -> np.ndarray:
    schema = model.spec.schema
    if isinstance(config, ResourceVector):
        if config.schema == schema:
            return config.as_array()
        config = config.as_dict()
    if isinstance(config, Mapping):
        return ResourceVector.from_mapping(schema, {n: config[n] for n in schema.names if n in config}).as_array()
    values = np.asarray(config, dtype=float)
    if values.shape != (schema.k,):
        raise DomainError(f"configuration must have {schema.k} resource values")
    return values


def predict_inverse(model: FittedModel, config) -> float:
    """Ŷ = Σ α_k X_k for one configuration; raises if Ŷ ≤ 0."""
    values = _config_values(model, config)
    yhat = float(model.inverse_scores(values)[0])
    if not (yhat > 0 and np.isfinite(yhat)):
        shown = ", ".join(f"{n}={v:g}" for n, v in zip(model.spec.schema.names, values))
        raise PredictionError(
            f"model predicts a nonpositive inverse score ({yhat!r}) for configuration [{shown}]; "
            "the configuration is outside the region where the model is valid",
            config=dict(zip(model.spec.schema.names, map(float, values))), value=yhat,
        )
    return yhat


def predict_score(model: FittedModel, config) -> float:
    return 1.0 / predict_inverse(model, config)


@dataclass(frozen=True)
class FractionEstimate:
    serial_hat: float
    per_term: dict
    valid: bool

    @property
    def total(self) -> float:
        return self.serial_hat + sum(self.per_term.values())


def extract_fractions(model_or_coefficients, terms=None) -> FractionEstimate:
    """Normalise coefficients by their sum to recover serial and per-term fractions.

    Accepts a :class:`FittedModel` or a raw coefficient vector (intercept
    first) together with the term list.
    """
    if isinstance(model_or_coefficients, FittedModel):
        alpha = model_or_coefficients.coefficients_raw
        terms = model_or_coefficients.spec.terms
    else:
        alpha = np.asarray(model_or_coefficients, dtype=float)
        terms = list(terms) if terms is not None else [f"x{i}" for i in range(1, alpha.size)]
    if alpha.size != len(terms) + 1:
        raise DomainError(f"expected {len(terms) + 1} coefficients, got {alpha.size}")
    total = float(np.sum(alpha))
    if not abs(total) > 1e-12:
        raise NumericalError(f"coefficients sum to {total!r}; fractions are undefined")
    frac = alpha / total
    valid = bool(np.all((frac >= -FRACTION_SLACK) & (frac <= 1.0 + FRACTION_SLACK)))
    return FractionEstimate(float(frac[0]), {t: float(f) for t, f in zip(terms, frac[1:])}, valid)
