"""Monomial feature terms and the reciprocal-transform design matrix."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import DomainError
from .model_core import ResourceSchema, ResourceVector

INTERCEPT_LABEL = "intercept"

_UNIT_SUFFIXES = ("_mhz", "_ghz", "_mb", "_gb", "_kb")

# Engineered terms with a conventional name, keyed by unit-free resource roles.
_NAMED_TERMS = {
    frozenset({("mem_freq", 1), ("mem_channels", 1), ("cores", -1)}): "bandwidth-per-core",
    frozenset({("llc", 1), ("cores", -1)}): "llc-per-core",
}


def _role(name: str) -> str:
    for suffix in _UNIT_SUFFIXES:
        if name.endswith(suffix):
            return name[: -len(suffix)]
    return name


def _power(name: str, e: int) -> str:
    return name if abs(e) == 1 else f"{name}^{abs(e)}"


def default_label(exponents: Mapping[str, int]) -> str:
    named = _NAMED_TERMS.get(frozenset((_role(n), e) for n, e in exponents.items()))
    if named:
        return named
    num = [_power(n, e) for n, e in exponents.items() if e > 0]
    den = [_power(n, e) for n, e in exponents.items() if e < 0]
    label = "*".join(num) if num else "1"
    if den:
        label += "/" + (den[0] if len(den) == 1 else "(" + "*".join(den) + ")")
    return label


def _as_exponent(value) -> int:
    if isinstance(value, bool):
        raise DomainError(f"malformed exponent {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    raise DomainError(f"malformed exponent {value!r}: exponents must be integers")


@dataclass(frozen=True)
class FeatureTerm:
    """A monomial over resources, e.g. ``{cores: 1, mem_freq_mhz: 1}``.

    Equality and hashing depend on the exponents only; the label is cosmetic.
    """

    exponents: tuple[tuple[str, int], ...]
    label: str = field(default="", compare=False)

    def __post_init__(self):
        exps = {}
        for name, e in self.exponents:
            e = _as_exponent(e)
            if name in exps:
                raise DomainError(f"resource {name!r} repeated in one term")
            if e != 0:
                exps[name] = e
        if not exps:
            raise DomainError("a feature term needs at least one nonzero exponent")
        object.__setattr__(self, "exponents", tuple(sorted(exps.items())))
        if not self.label:
            object.__setattr__(self, "label", default_label(dict(self.exponents)))

    @classmethod
    def of(cls, mapping: Mapping[str, int] | None = None, label: str = "", **kwargs) -> "FeatureTerm":
        items = dict(mapping or {}, **kwargs)
        return cls(tuple(items.items()), label)

    @property
    def resources(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.exponents)

    def as_dict(self) -> dict[str, int]:
        return dict(self.exponents)

    def validate(self, schema: ResourceSchema) -> "FeatureTerm":
        unknown = [n for n in self.resources if n not in schema]
        if unknown:
            raise DomainError(f"term {self.label!r} references unknown resource(s): {', '.join(unknown)}")
        return self

    def __str__(self):
        return self.label


def standard_terms(schema: ResourceSchema, include_pairwise: bool = False,
                   extra: Iterable[FeatureTerm] = ()) -> list[FeatureTerm]:
    """Singles in schema order, then pairs by schema index, then ``extra``; deduplicated.

    Interactions of three or more resources are only added through ``extra``.
    """
    terms = [FeatureTerm.of({n: 1}) for n in schema.names]
    if include_pairwise:
        terms += [FeatureTerm.of({a: 1, b: 1}) for a, b in combinations(schema.names, 2)]
    for term in extra:
        terms.append(term.validate(schema))
    return _dedupe(terms)


def _dedupe(terms: Iterable[FeatureTerm]) -> list[FeatureTerm]:
    seen = set()
    out = []
    for t in terms:
        if t not in seen:
            seen.add(t)
            out.append(t)
    return out


def ratio_matrix(terms: Sequence[FeatureTerm], schema: ResourceSchema, base: np.ndarray,
                 values: np.ndarray) -> np.ndarray:
    """Enhancement ratios, one column per term and one row per configuration.

    Entry (i, t) is the product over the term's resources of
    ``(base_j / values_ij) ** e_j``.
    """
    base = np.asarray(base, dtype=float)
    values = np.atleast_2d(np.asarray(values, dtype=float))
    if base.shape != (schema.k,) or values.shape[1] != schema.k:
        raise DomainError(f"configurations must have {schema.k} resource values")
    for what, arr in (("baseline", base[None, :]), ("configuration", values)):
        bad = ~(np.isfinite(arr) & (arr > 0))
        if bad.any():
            i, j = map(int, np.argwhere(bad)[0])
            where = "" if what == "baseline" else f" row {i}"
            raise DomainError(
                f"{what}{where}: resource {schema.names[j]!r} must be positive, got {arr[i, j]!r}"
            )
    rel = base / values
    out = np.ones((values.shape[0], len(terms)))
    for t, term in enumerate(terms):
        col = out[:, t]
        for name, e in term.exponents:
            col *= rel[:, schema.index(name)] ** e
    return out


def term_ratio(term: FeatureTerm, base: ResourceVector, test: ResourceVector) -> float:
    if base.schema != test.schema:
        raise DomainError("baseline and test configurations use different schemas")
    term.validate(base.schema)
    return float(ratio_matrix([term], base.schema, base.as_array(), test.as_array())[0, 0])


@dataclass(frozen=True)
class ModelSpec:
    """Feature terms over a schema, anchored at a baseline configuration.

    ``baseline`` may be None until a dataset is available; see
    :meth:`resolve_baseline`.
    """

    schema: ResourceSchema
    terms: tuple[FeatureTerm, ...]
    baseline: Optional[ResourceVector] = None
    label: str = ""

    def __post_init__(self):
        terms = tuple(self.terms)
        object.__setattr__(self, "terms", terms)
        if len(set(terms)) != len(terms):
            dupes = [t.label for i, t in enumerate(terms) if t in terms[:i]]
            raise DomainError(f"duplicate terms: {', '.join(dupes)}")
        for t in terms:
            t.validate(self.schema)
        if self.baseline is not None and self.baseline.schema != self.schema:
            raise DomainError("baseline does not conform to the model schema")

    @property
    def n_terms(self) -> int:
        return len(self.terms)

    @property
    def column_labels(self) -> list[str]:
        return [INTERCEPT_LABEL] + [t.label for t in self.terms]

    def with_baseline(self, baseline: ResourceVector) -> "ModelSpec":
        return ModelSpec(self.schema, self.terms, baseline, self.label)

    def resolve_baseline(self, values: np.ndarray) -> "ModelSpec":
        """Fill a missing baseline with the per-resource minimum of ``values``."""
        if self.baseline is not None:
            return self
        values = np.atleast_2d(np.asarray(values, dtype=float))
        if values.shape[0] == 0:
            raise DomainError("cannot default the baseline from an empty dataset")
        return self.with_baseline(ResourceVector(self.schema, tuple(values.min(axis=0))))

    def ratios(self, values: np.ndarray) -> np.ndarray:
        if self.baseline is None:
            raise DomainError("model spec has no baseline")
        return ratio_matrix(self.terms, self.schema, self.baseline.as_array(), values)


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    X: np.ndarray
    y: np.ndarray
    labels: tuple[str, ...]
    spec: Optional[ModelSpec] = None

    @property
    def n(self) -> int:
        return self.X.shape[0]


def design_from_values(spec: ModelSpec, values: np.ndarray, scores: np.ndarray) -> DesignMatrix:
    scores = np.asarray(scores, dtype=float)
    bad = np.flatnonzero(~(np.isfinite(scores) & (scores > 0)))
    if bad.size:
        raise DomainError(f"row {int(bad[0])}: score must be positive, got {scores[bad[0]]!r}")
    spec = spec.resolve_baseline(values)
    X = np.hstack([np.ones((len(scores), 1)), spec.ratios(values)])
    if X.shape[0] < 1:
        raise DomainError("design needs at least one row")
    return DesignMatrix(X=X, y=1.0 / scores, labels=tuple(spec.column_labels), spec=spec)


def build_design(spec: ModelSpec, data) -> DesignMatrix:
    """Regression target ``1/score`` and ratio features for every dataset row."""
    data = data.project(spec.schema)
    return design_from_values(spec, data.values, data.scores)
