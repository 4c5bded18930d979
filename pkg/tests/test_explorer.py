import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from amdahl_learn.errors import DomainError
from amdahl_learn.explorer import Candidate, CostModel, ExplorationResult, explore, frontier
from amdahl_learn.features import FeatureTerm, ModelSpec, standard_terms
from amdahl_learn.model_core import FractionSet, ResourceSchema, ResourceVector
from amdahl_learn.regression import FittedModel, Scaler, fit_dataset
from amdahl_learn.synthetic import GroundTruth, RangeTable, generate, sample_configs

S3 = ResourceSchema(("cores", "freq", "mem"))
TERMS = tuple(standard_terms(S3, include_pairwise=True))


@pytest.fixture(scope="module")
def truth():
    w = [0.1, 0.3, 0.2, 0.1, 0.1, 0.1, 0.1]
    spec = ModelSpec(S3, TERMS, ResourceVector(S3, (1.0, 1.0, 1.0)))
    return GroundTruth(spec, FractionSet(w[0], dict(zip(TERMS, w[1:]))), 20.0)


@pytest.fixture(scope="module")
def model(truth):
    train = RangeTable.from_spec({"cores": {"levels": [1, 2, 4, 8]}, "freq": {"levels": [1, 1.5, 2, 3]},
                                  "mem": {"levels": [1, 2, 3]}})
    return fit_dataset(truth.spec, generate(truth, sample_configs(train, mode="full-grid")))


GRID = RangeTable.from_spec({"cores": {"levels": [2, 8]}, "freq": {"levels": [1.5, 3]}, "mem": {"levels": [1, 3]}})
COST = CostModel({"cores": 10.0, "freq": 4.0, "mem": 1.0}, offset=5.0)


def brute_force(truth, ranges, target, cost):
    rows = []
    for combo in itertools.product(*[lv for _, lv in ranges.entries]):
        score = float(truth.scores(np.array([combo]))[0])
        c = cost.offset + sum(cost.weights.get(n, 0.0) * v for n, v in zip(ranges.schema.names, combo))
        if score >= target:
            rows.append((c, combo, score))
    rows.sort(key=lambda r: (r[0], r[1]))
    return rows


def test_vacuous_target(model):
    r = explore(model, GRID, 1e-9, COST, limit=10)
    assert r.evaluated == 8 and len(r.feasible) == 8 and r.infeasible == 0 and r.errors == 0
    costs = [c.cost for c in r.feasible]
    assert costs == sorted(costs)


def test_unreachable_target(model):
    r = explore(model, GRID, 1e9, COST)
    assert r.feasible == () and r.evaluated == 8 and r.infeasible == 8


def test_known_point_is_found(model, truth):
    point = np.array([[8.0, 1.5, 3.0]])
    target = float(truth.scores(point)[0])
    r = explore(model, GRID, target * (1 - 1e-9), COST, limit=8)
    match = [c for c in r.feasible if c.config.values == (8.0, 1.5, 3.0)]
    assert match and match[0].score == pytest.approx(target, rel=1e-6)


def test_matches_brute_force(model, truth):
    grid_scores = truth.scores(GRID.grid())
    target = float(np.median(grid_scores))
    expected = brute_force(truth, GRID, target, COST)
    r = explore(model, GRID, target, COST, limit=100)
    assert [c.config.values for c in r.feasible] == [e[1] for e in expected]
    assert [c.cost for c in r.feasible] == pytest.approx([e[0] for e in expected])
    assert all(c.score >= target for c in r.feasible)


def test_limit_and_ties(model):
    flat = CostModel({}, offset=1.0)
    r = explore(model, GRID, 1e-9, flat, limit=3)
    assert len(r.feasible) == 3 and r.total_feasible == 8
    # All costs tie, so the order is lexicographic over the grid.
    assert [c.config.values for c in r.feasible] == [tuple(v) for v in GRID.grid()[:3]]


def test_errors_counted():
    s = ResourceSchema(("r",))
    spec = ModelSpec(s, (FeatureTerm.of(r=1),), ResourceVector(s, (10.0,)))
    model = FittedModel(spec, np.array([1.0, -0.9]), np.array([1.0, -0.9]), Scaler.identity(1), 2, 1.0, 0.0)
    r = explore(model, RangeTable.from_spec({"r": {"levels": [1, 5, 10, 20]}}), 0.1)
    assert r.errors == 2 and r.evaluated == 4
    assert all(c.config.values[0] >= 10 for c in r.feasible)


def test_grid_cap(model):
    big = RangeTable.from_spec({n: {"min": 1, "max": 200, "step": 1} for n in S3.names})
    with pytest.raises(DomainError, match="8000000"):
        explore(model, big, 1.0)


def test_within_ranges_and_pure(model):
    r1 = explore(model, GRID, 45.0, COST)
    r2 = explore(model, GRID, 45.0, COST)
    assert r1 == r2
    assert 0 < len(r1.feasible) < 8
    assert GRID.contains(np.array([c.config.values for c in r1.feasible])).all()


def test_monotone_feasibility(model):
    assert np.all(model.coefficients_raw > 0)
    grid = RangeTable.from_spec({"cores": {"levels": [1, 2, 4, 8]}, "freq": {"levels": [1, 2, 3]},
                                 "mem": {"levels": [1, 2]}})
    r = explore(model, grid, 40.0, COST, limit=10**6)
    feasible = {c.config.values for c in r.feasible}
    levels = grid.levels
    for cfg in feasible:
        for j, name in enumerate(S3.names):
            for higher in levels[name]:
                if higher > cfg[j]:
                    bumped = list(cfg)
                    bumped[j] = higher
                    assert tuple(bumped) in feasible


def _result(pairs):
    s = ResourceSchema(("r",))
    return ExplorationResult(0.0, tuple(Candidate(ResourceVector(s, (i + 1.0,)), sc, c)
                                        for i, (c, sc) in enumerate(pairs)), len(pairs), 0, 0)


class TestFrontier:
    def test_dominance(self):
        assert frontier(_result([(1, 10), (2, 9), (3, 12)])) == [(1, 10), (3, 12)]

    def test_singleton(self):
        assert frontier(_result([(4, 7)])) == [(4, 7)]

    def test_equal_cost_keeps_higher(self):
        assert frontier(_result([(1, 5), (1, 8), (2, 6)])) == [(1, 8)]

    def test_empty(self):
        assert frontier(_result([])) == []

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 20), st.floats(0.1, 100)), max_size=30))
    def test_staircase(self, pairs):
        pairs.sort(key=lambda p: p[0])
        stairs = frontier(_result(pairs))
        costs = [c for c, _ in stairs]
        scores = [s for _, s in stairs]
        assert costs == sorted(set(costs))
        assert all(a < b for a, b in zip(scores, scores[1:]))
        for c, s in stairs:
            assert all(sc < s for cc, sc in pairs if cc < c)


def test_cost_model():
    cm = CostModel({"cores": 2.0}, 1.0)
    assert cm.cost(ResourceVector(S3, (3.0, 1.0, 1.0))) == 7.0
    with pytest.raises(DomainError):
        cm.vector(ResourceSchema(("freq",)))
