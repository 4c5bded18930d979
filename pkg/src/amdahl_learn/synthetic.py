"""Benchmark-like datasets drawn from a known extended-Amdahl model.

Used as a ground-truth oracle for fitting, cross-validation and exploration.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .dataset import Dataset
from .errors import DomainError
from .features import FeatureTerm, ModelSpec
from .model_core import FractionSet, ResourceSchema, ResourceVector, denominators

GRID_CAP = 10**6
NOISE_TRUNCATION = 0.5
_SEED_MASK = (1 << 64) - 1


def _levels_from_step(lo: float, hi: float, step: float) -> tuple[float, ...]:
    if not step > 0:
        raise DomainError(f"step must be positive, got {step!r}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    levels = [round(lo + i * step, 10) for i in range(count)]
    if levels[-1] < hi:
        levels.append(hi)
    return tuple(levels)


@dataclass(frozen=True)
class RangeTable:
    """Discrete levels for each resource, in schema order."""

    entries: tuple[tuple[str, tuple[float, ...]], ...]

    def __post_init__(self):
        entries = []
        for name, levels in self.entries:
            levels = tuple(sorted({float(v) for v in levels}))
            if not levels:
                raise DomainError(f"resource {name!r} has no levels")
            if not all(math.isfinite(v) and v > 0 for v in levels):
                raise DomainError(f"levels for {name!r} must be positive and finite")
            entries.append((name, levels))
        object.__setattr__(self, "entries", tuple(entries))
        ResourceSchema(tuple(n for n, _ in entries))

    @classmethod
    def from_spec(cls, spec: Mapping[str, Mapping]) -> "RangeTable":
        """Build from ``{name: {"levels": [...]}}`` or ``{name: {"min", "max", "step"}}``.

        A missing step with min == max gives a single level; with min < max
        it gives the two endpoints.
        """
        entries = []
        for name, item in spec.items():
            if "levels" in item:
                levels = tuple(item["levels"])
            else:
                lo, hi = float(item["min"]), float(item["max"])
                if not 0 < lo <= hi:
                    raise DomainError(f"range for {name!r} needs 0 < min <= max, got {lo!r}, {hi!r}")
                step = item.get("step")
                levels = _levels_from_step(lo, hi, float(step)) if step else tuple({lo, hi})
            entries.append((name, levels))
        return cls(tuple(entries))

    @property
    def schema(self) -> ResourceSchema:
        return ResourceSchema(tuple(n for n, _ in self.entries))

    @property
    def levels(self) -> dict[str, tuple[float, ...]]:
        return dict(self.entries)

    @property
    def grid_size(self) -> int:
        return math.prod(len(lv) for _, lv in self.entries)

    def minimum(self) -> ResourceVector:
        return ResourceVector(self.schema, tuple(lv[0] for _, lv in self.entries))

    def maximum(self) -> ResourceVector:
        return ResourceVector(self.schema, tuple(lv[-1] for _, lv in self.entries))

    def grid(self, cap: int = GRID_CAP) -> np.ndarray:
        """Every level combination, first resource varying slowest."""
        size = self.grid_size
        if size > cap:
            raise DomainError(f"grid has {size} configurations, above the cap of {cap}")
        axes = np.meshgrid(*[np.asarray(lv) for _, lv in self.entries], indexing="ij")
        return np.stack([a.reshape(-1) for a in axes], axis=1)

    def contains(self, values: np.ndarray) -> np.ndarray:
        values = np.atleast_2d(values)
        return np.all([np.isin(values[:, j], lv) for j, (_, lv) in enumerate(self.entries)], axis=0)

    def to_dict(self) -> dict:
        return {name: {"levels": list(levels)} for name, levels in self.entries}


def e1_ranges() -> RangeTable:
    """Design space modelled on the first Xeon experiment (58 measured runs)."""
    return RangeTable.from_spec({
        "cores": {"min": 1, "max": 28, "step": 1},
        "core_freq_mhz": {"min": 1800, "max": 2500, "step": 100},
        "uncore_freq_mhz": {"min": 2200, "max": 2200},
        "llc_mb": {"min": 7, "max": 38, "step": 1},
        "mem_freq_mhz": {"levels": [2133, 2400, 2667]},
        "mem_channels": {"min": 6, "max": 6},
    })


E1_DATAPOINTS = 58


def sample_configs(ranges: RangeTable, n: int = 1, seed: int = 0, mode: str = "random-uniform",
                   cap: int = GRID_CAP) -> np.ndarray:
    """Configuration rows drawn from ``ranges``.

    ``random-uniform`` picks each resource's level independently and uniformly;
    ``full-grid`` returns the whole Cartesian product (``n`` ignored).
    """
    if mode == "full-grid":
        return ranges.grid(cap)
    if mode != "random-uniform":
        raise DomainError(f"unknown sampling mode {mode!r}")
    if int(n) != n or n < 1:
        raise DomainError(f"sample size must be a positive integer, got {n!r}")
    rng = np.random.Generator(np.random.PCG64(int(seed) & _SEED_MASK))
    cols = [np.asarray(lv)[rng.integers(0, len(lv), size=int(n))] for _, lv in ranges.entries]
    return np.stack(cols, axis=1)


def as_vectors(schema: ResourceSchema, values: np.ndarray) -> list[ResourceVector]:
    return [ResourceVector(schema, tuple(row)) for row in np.atleast_2d(values)]


@dataclass(frozen=True)
class NoiseSpec:
    """Multiplicative Gaussian noise, truncated to (-0.5, 0.5)."""

    sigma: float = 0.0
    seed: int = 0
    kind: str = ""

    def __post_init__(self):
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise DomainError(f"noise sigma must be nonnegative, got {self.sigma!r}")
        kind = self.kind or ("none" if self.sigma == 0 else "multiplicative-gaussian")
        if kind not in ("none", "multiplicative-gaussian"):
            raise DomainError(f"unknown noise kind {kind!r}")
        if kind == "none" and self.sigma != 0:
            raise DomainError("noise kind 'none' requires sigma = 0")
        if self.sigma == 0:
            kind = "none"
        object.__setattr__(self, "kind", kind)

    def draws(self, n: int) -> np.ndarray:
        """Relative errors; draw i depends only on (seed, i)."""
        if self.kind == "none":
            return np.zeros(n)
        key = int(self.seed) & _SEED_MASK
        out = np.empty(n)
        for i in range(n):
            rng = np.random.Generator(np.random.Philox(key=key, counter=i))
            eps = self.sigma * rng.standard_normal()
            while not -NOISE_TRUNCATION < eps < NOISE_TRUNCATION:
                eps = self.sigma * rng.standard_normal()
            out[i] = eps
        return out


@dataclass(frozen=True)
class GroundTruth:
    spec: ModelSpec
    fractions: FractionSet
    baseline_perf: float

    def __post_init__(self):
        if self.spec.baseline is None:
            raise DomainError("a ground-truth model needs an explicit baseline")
        if not (self.baseline_perf > 0 and math.isfinite(self.baseline_perf)):
            raise DomainError(f"baseline performance must be positive, got {self.baseline_perf!r}")
        self.fractions.check()
        self.fractions.vector(self.spec.terms)

    def speedups(self, values: np.ndarray) -> np.ndarray:
        denom = denominators(self.fractions.serial, self.fractions.vector(self.spec.terms),
                             self.spec.ratios(values))
        if not np.all(denom > 0):
            raise DomainError("speedup denominator must be positive")
        return 1.0 / denom

    def scores(self, values: np.ndarray) -> np.ndarray:
        """Noiseless scores for configuration rows."""
        return self.baseline_perf * self.speedups(values)


def default_truth(ranges: RangeTable | None = None, baseline_perf: float = 10.0) -> GroundTruth:
    """Test fixture: serial 0.05, cores 0.55, core freq 0.20, mem freq 0.10,
    cores x mem freq 0.10, anchored at the range minimum."""
    ranges = ranges or e1_ranges()
    schema = ranges.schema
    fractions = {
        FeatureTerm.of(cores=1): 0.55,
        FeatureTerm.of(core_freq_mhz=1): 0.20,
        FeatureTerm.of(mem_freq_mhz=1): 0.10,
        FeatureTerm.of(cores=1, mem_freq_mhz=1): 0.10,
    }
    spec = ModelSpec(schema, tuple(fractions), ranges.minimum(), label="default-truth")
    return GroundTruth(spec, FractionSet(0.05, fractions), baseline_perf)


def generate(truth: GroundTruth, configs, noise: NoiseSpec = NoiseSpec(), source: str = "synthetic") -> Dataset:
    """Scores ``baseline_perf * speedup * (1 + eps)`` for each configuration."""
    schema = truth.spec.schema
    if isinstance(configs, np.ndarray):
        values = np.atleast_2d(configs).astype(float)
    else:
        vectors = list(configs)
        if any(v.schema != schema for v in vectors):
            raise DomainError("configurations do not conform to the ground-truth schema")
        values = np.array([v.values for v in vectors], dtype=float).reshape(-1, schema.k)
    scores = truth.scores(values) * (1.0 + noise.draws(values.shape[0]))
    return Dataset(schema, values, scores, source)
