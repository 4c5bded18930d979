"""Five-fold cross-validation scored by MAPE in the score domain."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import AmdahlError, DomainError, InputError, PredictionError
from .features import ModelSpec
from .metrics import absolute_percentage_errors, accuracy_from_mape, mape  # noqa: F401
from .regression import FittedModel, fit_dataset

N_FOLDS = 5
_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class FoldPlan:
    seed: int
    n: int
    assignments: tuple[int, ...]

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(self.assignments.count(f) for f in range(N_FOLDS))

    def validation_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.assignments) == fold)

    def training_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.assignments) != fold)


def make_folds(n: int, seed: int = 0) -> FoldPlan:
    """Shuffle rows with a PCG64 generator seeded by ``seed``, then deal them
    into five contiguous blocks whose sizes differ by at most one."""
    if int(n) != n or n < N_FOLDS:
        raise DomainError(f"five-fold cross-validation needs at least {N_FOLDS} rows, got {n}")
    n = int(n)
    rng = np.random.Generator(np.random.PCG64(int(seed) & _SEED_MASK))
    order = rng.permutation(n)
    assignments = np.empty(n, dtype=int)
    for fold, block in enumerate(np.array_split(order, N_FOLDS)):
        assignments[block] = fold
    return FoldPlan(seed=int(seed), n=n, assignments=tuple(int(a) for a in assignments))


@dataclass(frozen=True)
class CvReport:
    label: str
    seed: int
    fold_mape: tuple[float, ...]
    fold_sizes: tuple[int, ...]
    assignments: tuple[int, ...] = ()
    failed_rows: tuple[int, ...] = ()
    warnings: tuple[str, ...] = ()
    predictions: tuple[float, ...] = field(default=(), repr=False)

    @property
    def n(self) -> int:
        return sum(self.fold_sizes)

    @property
    def mean_mape(self) -> float:
        return math.fsum(self.fold_mape) / len(self.fold_mape)

    @property
    def accuracy(self) -> float:
        return accuracy_from_mape(self.mean_mape)

    @property
    def fold_accuracy(self) -> tuple[float, ...]:
        return tuple(accuracy_from_mape(m) for m in self.fold_mape)

    def to_dict(self) -> dict:
        return {
            "format": "amdahl-cv/1",
            "label": self.label,
            "seed": self.seed,
            "n": self.n,
            "fold_mape_pct": list(self.fold_mape),
            "fold_sizes": list(self.fold_sizes),
            "mean_mape_pct": self.mean_mape,
            "accuracy_pct": self.accuracy,
            "failed_rows": list(self.failed_rows),
            "warnings": list(self.warnings),
            "assignments": list(self.assignments),
            "predictions": [None if math.isnan(p) else p for p in self.predictions],
        }

    @classmethod
    def from_dict(cls, d: dict, source=None) -> "CvReport":
        try:
            if d.get("format") != "amdahl-cv/1":
                raise InputError(f"unsupported report format {d.get('format')!r}", source)
            report = cls(
                label=str(d["label"]),
                seed=int(d["seed"]),
                fold_mape=tuple(float(m) for m in d["fold_mape_pct"]),
                fold_sizes=tuple(int(s) for s in d["fold_sizes"]),
                assignments=tuple(int(a) for a in d.get("assignments", ())),
                failed_rows=tuple(int(r) for r in d.get("failed_rows", ())),
                warnings=tuple(d.get("warnings", ())),
                predictions=tuple(float("nan") if p is None else float(p) for p in d.get("predictions", ())),
            )
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"malformed CV report: {exc!r}", source) from None
        if len(report.fold_mape) != N_FOLDS or len(report.fold_sizes) != N_FOLDS:
            raise InputError(f"a CV report needs {N_FOLDS} folds", source)
        return report

    def table(self) -> str:
        """Aligned plain-text summary: one line per fold plus the mean."""
        lines = [f"model: {self.label}  (n={self.n}, seed={self.seed})",
                 f"{'fold':>6} {'n_valid':>8} {'MAPE%':>12} {'accuracy%':>12}"]
        for fold, (size, m) in enumerate(zip(self.fold_sizes, self.fold_mape)):
            lines.append(f"{fold:>6d} {size:>8d} {m:>12.6f} {accuracy_from_mape(m):>12.6f}")
        lines.append(f"{'mean':>6} {self.n:>8d} {self.mean_mape:>12.6f} {self.accuracy:>12.6f}")
        if self.failed_rows:
            lines.append(f"failed predictions (counted as 100% error) at rows: "
                         f"{', '.join(map(str, self.failed_rows))}")
        return "\n".join(lines) + "\n"


SWEEP_HEADER = ["label", "n", "seed", "mean_mape_pct", "accuracy_pct",
                *[f"fold{i}_mape_pct" for i in range(N_FOLDS)], "failed_rows"]


def sweep_rows(reports) -> list[list]:
    """One row per model, ready for :func:`dataset.csv_text` with SWEEP_HEADER."""
    return [[r.label, r.n, r.seed, r.mean_mape, r.accuracy, *r.fold_mape, len(r.failed_rows)]
            for r in reports]


def cross_validate(spec: ModelSpec, data, seed: int = 0, label: str | None = None,
                   normalize: bool = True) -> CvReport:
    """Fit on four folds, score the fifth, for each of the five folds.

    Scalers, baselines (when the spec leaves them open) and coefficients are
    computed from training rows only.  Validation rows whose prediction fails
    count as 100% error and are listed in ``failed_rows``.
    """
    data = data.project(spec.schema)
    plan = make_folds(data.m, seed)
    fold_mape, sizes, failed = [], [], []
    predictions = np.full(data.m, np.nan)
    messages: dict[str, type] = {}
    for fold in range(N_FOLDS):
        train, valid = plan.training_rows(fold), plan.validation_rows(fold)
        try:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                model = fit_dataset(spec, data.subset(train), normalize=normalize)
        except AmdahlError as exc:
            if isinstance(exc, (InputError, PredictionError)):
                raise
            raise type(exc)(f"fold {fold}: {exc}") from exc
        for w in caught:
            messages.setdefault(f"fold {fold}: {w.message}", w.category)
        pred = model.scores(data.values[valid])
        predictions[valid] = pred
        failed.extend(int(i) for i in valid[np.isnan(pred)])
        fold_mape.append(mape(data.scores[valid], pred))
        sizes.append(int(valid.size))
    for msg, category in messages.items():
        warnings.warn(msg, category, stacklevel=2)
    return CvReport(
        label=label if label is not None else (spec.label or "model"),
        seed=int(seed),
        fold_mape=tuple(fold_mape),
        fold_sizes=tuple(sizes),
        assignments=plan.assignments,
        failed_rows=tuple(sorted(failed)),
        warnings=tuple(messages),
        predictions=tuple(float(p) for p in predictions),
    )


def fold_models(spec: ModelSpec, data, seed: int = 0, normalize: bool = True) -> list[FittedModel]:
    """The five per-fold models that :func:`cross_validate` scores."""
    data = data.project(spec.schema)
    plan = make_folds(data.m, seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return [fit_dataset(spec, data.subset(plan.training_rows(f)), normalize=normalize)
                for f in range(N_FOLDS)]
