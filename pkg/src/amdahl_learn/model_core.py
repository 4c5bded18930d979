"""Forward speedup model: Amdahl's law extended to several resources.

Every program fraction is enhanced by exactly one feature term (a single
resource, an interaction, or an engineered monomial).  The speedup of a test
configuration over a baseline is the reciprocal of

    serial + sum_t fraction_t * ratio_t(base, test)

where ``ratio_t`` is the term's monomial evaluated at the baseline divided by
the monomial evaluated at the test configuration.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError

UNIT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class ResourceSchema:
    """Ordered, unique resource identifiers."""

    names: tuple[str, ...]

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if not names:
            raise DomainError("a resource schema needs at least one resource")
        for name in names:
            if not isinstance(name, str) or not name.strip() or name != name.strip():
                raise DomainError(f"invalid resource name {name!r}")
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise DomainError(f"duplicate resource names: {', '.join(dupes)}")

    @property
    def k(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise DomainError(f"unknown resource {name!r}") from None

    def __len__(self):
        return len(self.names)

    def __contains__(self, name):
        return name in self.names


def _check_positive(values: Sequence[float], names: Sequence[str]):
    for name, v in zip(names, values):
        if not (v > 0 and math.isfinite(v)):
            raise DomainError(f"resource {name!r} must be positive and finite, got {v!r}")


@dataclass(frozen=True)
class ResourceVector:
    """One system configuration: a positive value per schema resource."""

    schema: ResourceSchema
    values: tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if len(values) != self.schema.k:
            raise DomainError(
                f"expected {self.schema.k} resource values, got {len(values)}"
            )
        _check_positive(values, self.schema.names)

    @classmethod
    def from_mapping(cls, schema: ResourceSchema, mapping: Mapping[str, float]) -> "ResourceVector":
        missing = [n for n in schema.names if n not in mapping]
        if missing:
            raise DomainError(f"missing resource values: {', '.join(missing)}")
        extra = [n for n in mapping if n not in schema]
        if extra:
            raise DomainError(f"unknown resources: {', '.join(map(str, extra))}")
        return cls(schema, tuple(mapping[n] for n in schema.names))

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.schema.names, self.values))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def __getitem__(self, name: str) -> float:
        return self.values[self.schema.index(name)]


@dataclass(frozen=True)
class FractionSet:
    """Serial fraction plus one enhanced fraction per feature term.

    Construction only checks finiteness.  Ground-truth models call
    :meth:`check` to enforce fractions in [0, 1] that sum to one.
    """

    serial: float
    per_term: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "serial", float(self.serial))
        object.__setattr__(self, "per_term", {t: float(f) for t, f in self.per_term.items()})
        if not all(math.isfinite(f) for f in (self.serial, *self.per_term.values())):
            raise DomainError("fractions must be finite")

    @property
    def total(self) -> float:
        return self.serial + math.fsum(self.per_term.values())

    def check(self) -> "FractionSet":
        for label, f in [("serial", self.serial), *((str(t), f) for t, f in self.per_term.items())]:
            if not 0.0 <= f <= 1.0:
                raise DomainError(f"fraction {label} = {f!r} outside [0, 1]")
        if abs(self.total - 1.0) > UNIT_SUM_TOL:
            raise DomainError(f"fractions sum to {self.total!r}, expected 1")
        return self

    def vector(self, terms: Sequence) -> np.ndarray:
        """Per-term fractions ordered like ``terms``; keys must match exactly."""
        if set(terms) != set(self.per_term) or len(set(terms)) != len(terms):
            raise DomainError("fractions are not keyed exactly by the model terms")
        return np.array([self.per_term[t] for t in terms], dtype=float)


@dataclass(frozen=True)
class SpeedupResult:
    speedup: float
    denominator: float


def _result(denominator: float) -> SpeedupResult:
    if not denominator > 0 or not math.isfinite(denominator):
        raise DomainError(f"speedup denominator must be positive, got {denominator!r}")
    return SpeedupResult(speedup=1.0 / denominator, denominator=denominator)


def speedup_single(fraction: float, r_base: float, r_test: float) -> SpeedupResult:
    """Classic Amdahl speedup for enhancing one resource from r_base to r_test."""
    if not 0.0 <= fraction <= 1.0:
        raise DomainError(f"fraction must lie in [0, 1], got {fraction!r}")
    if not (r_base > 0 and r_test > 0 and math.isfinite(r_base) and math.isfinite(r_test)):
        raise DomainError(f"resource values must be positive, got {r_base!r}, {r_test!r}")
    return _result((1.0 - fraction) + fraction * (r_base / r_test))


def denominators(serial: float, fractions: np.ndarray, ratios: np.ndarray) -> np.ndarray:
    """Vectorised ``serial + ratios @ fractions`` over rows of a ratio matrix."""
    return serial + ratios @ fractions


def speedup_multi(fractions: FractionSet, terms: Sequence, base: ResourceVector,
                  test: ResourceVector) -> SpeedupResult:
    from .features import ratio_matrix

    if base.schema != test.schema:
        raise DomainError("baseline and test configurations use different schemas")
    f = fractions.vector(terms)
    ratios = ratio_matrix(terms, base.schema, base.as_array(), test.as_array()[None, :])
    return _result(float(denominators(fractions.serial, f, ratios)[0]))


def score_from_speedup(speedup: float, baseline_perf: float) -> float:
    if not (speedup > 0 and baseline_perf > 0):
        raise DomainError(
            f"speedup and baseline performance must be positive, got {speedup!r}, {baseline_perf!r}"
        )
    return baseline_perf * speedup
