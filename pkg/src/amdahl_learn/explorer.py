"""Inverse design-space queries: which configurations reach a target score,
and what do they cost."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import DomainError
from .model_core import ResourceSchema, ResourceVector
from .regression import FittedModel
from .synthetic import GRID_CAP, RangeTable


@dataclass(frozen=True)
class CostModel:
    """``offset + sum_j weight_j * value_j``; unlisted resources weigh zero."""

    weights: Mapping[str, float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self):
        weights = {str(k): float(v) for k, v in self.weights.items()}
        if not all(math.isfinite(w) for w in weights.values()) or not math.isfinite(self.offset):
            raise DomainError("cost weights and offset must be finite")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "offset", float(self.offset))

    def vector(self, schema: ResourceSchema) -> np.ndarray:
        unknown = [n for n in self.weights if n not in schema]
        if unknown:
            raise DomainError(f"cost weights for unknown resource(s): {', '.join(unknown)}")
        return np.array([self.weights.get(n, 0.0) for n in schema.names])

    def costs(self, schema: ResourceSchema, values: np.ndarray) -> np.ndarray:
        return self.offset + np.atleast_2d(values) @ self.vector(schema)

    def cost(self, config: ResourceVector) -> float:
        return float(self.costs(config.schema, config.as_array()[None, :])[0])


@dataclass(frozen=True)
class Candidate:
    config: ResourceVector
    score: float
    cost: float


@dataclass(frozen=True)
class ExplorationResult:
    target: float
    feasible: tuple[Candidate, ...]
    evaluated: int
    infeasible: int
    errors: int
    total_feasible: int = 0

    @property
    def schema(self) -> ResourceSchema | None:
        return self.feasible[0].config.schema if self.feasible else None


def explore(model: FittedModel, ranges: RangeTable, target_score: float, cost: CostModel = CostModel(),
            limit: int = 100, cap: int = GRID_CAP) -> ExplorationResult:
    """Evaluate every grid point, keep those predicted to reach ``target_score``
    and rank them by cost (ties in lexicographic configuration order).

    Grid points where the model's inverse score is nonpositive are counted in
    ``errors`` and excluded.
    """
    if not (target_score > 0 and math.isfinite(target_score)):
        raise DomainError(f"target score must be positive and finite, got {target_score!r}")
    if int(limit) != limit or limit < 1:
        raise DomainError(f"limit must be a positive integer, got {limit!r}")
    schema = model.spec.schema
    missing = [n for n in schema.names if n not in ranges.schema]
    if missing:
        raise DomainError(f"ranges lack model resource(s): {', '.join(missing)}")
    if ranges.schema != schema:
        ranges = RangeTable(tuple((n, ranges.levels[n]) for n in schema.names))
    grid = ranges.grid(cap)
    scores = model.scores(grid)
    failed = np.isnan(scores)
    ok = ~failed & (scores >= target_score)
    idx = np.flatnonzero(ok)
    costs = cost.costs(schema, grid[idx])
    # idx is already in lexicographic grid order, so a stable sort on cost keeps that tie order.
    order = idx[np.argsort(costs, kind="stable")]
    sorted_costs = np.sort(costs, kind="stable")
    keep = order[: int(limit)]
    feasible = tuple(
        Candidate(ResourceVector(schema, tuple(grid[i])), float(scores[i]), float(c))
        for i, c in zip(keep, sorted_costs[: int(limit)])
    )
    n_failed = int(failed.sum())
    return ExplorationResult(
        target=float(target_score), feasible=feasible, evaluated=int(grid.shape[0]),
        infeasible=int(grid.shape[0] - n_failed - idx.size), errors=n_failed, total_feasible=int(idx.size),
    )


def frontier(result: ExplorationResult) -> list[tuple[float, float]]:
    """Cost/score staircase: each kept entry beats every cheaper one."""
    best_by_cost: dict[float, float] = {}
    for cand in result.feasible:
        best_by_cost[cand.cost] = max(cand.score, best_by_cost.get(cand.cost, -math.inf))
    out: list[tuple[float, float]] = []
    for c in sorted(best_by_cost):
        s = best_by_cost[c]
        if not out or s > out[-1][1]:
            out.append((c, s))
    return out
