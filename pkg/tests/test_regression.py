import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from amdahl_learn.dataset import Dataset
from amdahl_learn.errors import DomainError, NumericalError, PredictionError, RankDeficiencyWarning
from amdahl_learn.features import DesignMatrix, FeatureTerm, ModelSpec, build_design, standard_terms
from amdahl_learn.model_core import FractionSet, ResourceSchema, ResourceVector
from amdahl_learn.regression import (FittedModel, Scaler, extract_fractions, fit, fit_dataset,
                                     predict_inverse, predict_score)
from amdahl_learn.synthetic import GroundTruth, RangeTable, generate, sample_configs


def random_design(rng, n, p):
    X = np.hstack([np.ones((n, 1)), rng.uniform(0.05, 1.0, (n, p - 1))])
    return X


def _design(X, y):
    return DesignMatrix(X=X, y=y, labels=tuple(["intercept"] + [f"x{i}" for i in range(1, X.shape[1])]))


S3 = ResourceSchema(("a", "b", "c"))
TERMS7 = tuple(standard_terms(S3, include_pairwise=True, extra=[FeatureTerm.of(a=1, b=1, c=1)]))


@pytest.fixture
def truth7():
    w = np.array([0.1, 0.25, 0.15, 0.1, 0.1, 0.1, 0.1, 0.1])
    spec = ModelSpec(S3, TERMS7, ResourceVector(S3, (1.0, 1.0, 1.0)))
    return GroundTruth(spec, FractionSet(w[0], dict(zip(TERMS7, w[1:]))), baseline_perf=50.0)


@pytest.fixture
def ranges3():
    return RangeTable.from_spec({"a": {"min": 1, "max": 16, "step": 1},
                                 "b": {"min": 1, "max": 4, "step": 0.5},
                                 "c": {"levels": [1, 2, 3, 5, 8]}})


class TestFit:
    def test_exact_interpolation(self):
        rng = np.random.default_rng(3)
        X = random_design(rng, 30, 6)
        alpha = rng.normal(size=6)
        m = fit(_design(X, X @ alpha))
        np.testing.assert_allclose(m.coefficients_raw, alpha, rtol=1e-9, atol=1e-12)
        assert m.rank == 6

    def test_matches_svd_oracle(self):
        rng = np.random.default_rng(4)
        X = random_design(rng, 40, 5)
        y = rng.uniform(0.1, 1.0, 40)
        m = fit(_design(X, y))
        oracle, *_ = np.linalg.lstsq(X, y, rcond=None)
        np.testing.assert_allclose(m.coefficients_raw, oracle, rtol=1e-8)

    def test_constant_column_warns_with_name(self):
        rng = np.random.default_rng(5)
        X = random_design(rng, 20, 4)
        X[:, 2] = 0.5
        with pytest.warns(RankDeficiencyWarning, match="'x2'"):
            m = fit(_design(X, rng.uniform(0.1, 1, 20)))
        assert m.rank == 3
        assert m.coefficients_raw[2] == 0.0
        assert any("x2" in d for d in m.diagnostics)

    def test_rank_deficient_is_minimum_norm(self):
        rng = np.random.default_rng(6)
        X = random_design(rng, 25, 4)
        X[:, 3] = 2 * X[:, 1] - X[:, 2]
        y = rng.uniform(0.1, 1, 25)
        with pytest.warns(RankDeficiencyWarning, match="rank deficient"):
            m = fit(_design(X, y))
        Xs = m.scaler.transform(X)
        np.testing.assert_allclose(m.coefficients_scaled, np.linalg.pinv(Xs) @ y, atol=1e-10)

    def test_recovers_seven_term_truth(self, truth7, ranges3):
        data = generate(truth7, sample_configs(ranges3, 50, seed=11))
        design = build_design(truth7.spec, data)
        assert design.X.shape == (50, 8)
        m = fit(design)
        expected = np.r_[truth7.fractions.serial, truth7.fractions.vector(TERMS7)] / truth7.baseline_perf
        np.testing.assert_allclose(m.coefficients_raw, expected, rtol=1e-6, atol=1e-12)
        est = extract_fractions(m)
        assert est.valid
        assert est.serial_hat == pytest.approx(truth7.fractions.serial, abs=1e-6)

    def test_empty_design(self):
        with pytest.raises(DomainError):
            fit(_design(np.ones((0, 2)), np.ones(0)))

    def test_residual_orthogonality(self):
        rng = np.random.default_rng(8)
        X = random_design(rng, 60, 7)
        y = rng.uniform(0.1, 1, 60)
        m = fit(_design(X, y))
        Xs = m.scaler.transform(X)
        assert np.max(np.abs(Xs.T @ (y - Xs @ m.coefficients_scaled))) <= 1e-8

    def test_scaled_and_unscaled_agree(self):
        rng = np.random.default_rng(9)
        X = random_design(rng, 60, 5)
        y = rng.uniform(0.1, 1, 60)
        a = fit(_design(X, y), normalize=True)
        b = fit(_design(X, y), normalize=False)
        np.testing.assert_allclose(X @ a.coefficients_raw, X @ b.coefficients_raw, rtol=1e-8)

    def test_raw_and_scaled_predictions_agree(self, truth7, ranges3):
        data = generate(truth7, sample_configs(ranges3, 50, seed=2))
        m = fit_dataset(truth7.spec, data)
        probe = sample_configs(ranges3, 200, seed=99)
        np.testing.assert_allclose(m.inverse_scores(probe), m.inverse_scores_scaled(probe), rtol=1e-9)

    def test_deterministic(self):
        rng = np.random.default_rng(10)
        X = random_design(rng, 30, 5)
        y = rng.uniform(0.1, 1, 30)
        a, b = fit(_design(X, y)), fit(_design(X, y))
        assert a.coefficients_raw.tobytes() == b.coefficients_raw.tobytes()
        assert a.coefficients_scaled.tobytes() == b.coefficients_scaled.tobytes()
        assert (a.rank, a.condition, a.training_mape) == (b.rank, b.condition, b.training_mape)


class TestScaler:
    @settings(max_examples=50, deadline=None)
    @given(st.integers(2, 30), st.integers(1, 6), st.integers(0, 2**32 - 1))
    def test_round_trip(self, n, p, seed):
        rng = np.random.default_rng(seed)
        X = np.hstack([np.ones((n, 1)), rng.uniform(0.01, 100.0, (n, p))])
        sc = Scaler.fit(X)
        np.testing.assert_allclose(sc.inverse_transform(sc.transform(X)), X, rtol=1e-12, atol=1e-12)
        assert np.all(sc.std >= 0)

    def test_degenerate_scaled_by_one(self):
        X = np.array([[1.0, 2.0, 3.0], [1.0, 2.0, 4.0]])
        sc = Scaler.fit(X)
        assert sc.degenerate.tolist() == [True, False]
        assert sc.std[0] == 1.0


class TestPredict:
    @pytest.fixture
    def model(self, truth7, ranges3):
        data = generate(truth7, sample_configs(ranges3, 60, seed=21))
        return fit_dataset(truth7.spec, data), data

    def test_baseline_gives_coefficient_sum(self, model):
        m, _ = model
        assert predict_inverse(m, m.spec.baseline) == pytest.approx(np.sum(m.coefficients_raw), rel=1e-12)

    def test_matches_generator(self, model, truth7, ranges3):
        m, _ = model
        probe = sample_configs(ranges3, 100, seed=5)
        expected = 1.0 / truth7.scores(probe)
        got = np.array([predict_inverse(m, row) for row in probe])
        np.testing.assert_allclose(got, expected, rtol=1e-6)

    def test_training_row(self, model):
        m, data = model
        v, s = data.rows[3]
        assert predict_inverse(m, v) == pytest.approx(1.0 / s, rel=1e-9)

    def test_baseline_score(self, model, truth7):
        m, _ = model
        assert predict_score(m, m.spec.baseline) == pytest.approx(truth7.baseline_perf, rel=1e-6)

    def test_mapping_config(self, model):
        m, _ = model
        assert predict_score(m, {"a": 2, "b": 2, "c": 2}) == predict_score(m, np.array([2.0, 2.0, 2.0]))

    def _manual_model(self, intercept, slope):
        s = ResourceSchema(("r",))
        spec = ModelSpec(s, (FeatureTerm.of(r=1),), ResourceVector(s, (1.0,)))
        return FittedModel(spec, np.array([intercept, slope]), np.array([intercept, slope]),
                           Scaler.identity(1), 2, 1.0, 0.0)

    def test_reciprocal(self):
        m = self._manual_model(0.004, 0.006)
        assert predict_inverse(m, np.array([1.0])) == pytest.approx(0.01, rel=1e-15)
        assert predict_score(m, np.array([1.0])) == pytest.approx(100.0, rel=1e-12)

    def test_nonpositive_prediction_raises(self):
        m = self._manual_model(-0.5, 0.4)
        with pytest.raises(PredictionError, match="r=2"):
            predict_score(m, np.array([2.0]))
        assert np.isnan(m.scores(np.array([[2.0]]))[0])


class TestFractions:
    @pytest.mark.parametrize("c", [1e-3, 1.0, 250.0])
    def test_scale_cancels(self, c):
        est = extract_fractions(np.array([0.3, 0.4, 0.3]) * c, ["f1", "f2"])
        assert est.serial_hat == pytest.approx(0.3)
        assert est.per_term == pytest.approx({"f1": 0.4, "f2": 0.3})
        assert est.valid

    def test_negative_entry_invalid(self):
        est = extract_fractions(np.array([0.5, 2.0, -1.4]), ["f1", "f2"])
        assert not est.valid
        assert est.total == pytest.approx(1.0, abs=1e-9)

    def test_zero_sum(self):
        with pytest.raises(NumericalError):
            extract_fractions(np.array([1.0, -1.0]), ["f"])

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(min_value=-5, max_value=5), min_size=2, max_size=8),
           st.floats(min_value=1e-3, max_value=1e3))
    def test_rescaling_invariance(self, alpha, c):
        alpha = np.array(alpha)
        if abs(alpha.sum()) < 1e-3:
            return
        terms = [f"t{i}" for i in range(len(alpha) - 1)]
        a, b = extract_fractions(alpha, terms), extract_fractions(alpha * c, terms)
        assert a.serial_hat == pytest.approx(b.serial_hat, rel=1e-9, abs=1e-12)
        assert a.valid == b.valid or abs(abs(a.serial_hat) - 1.05) < 1e-6


def test_baseline_invariance(truth7, ranges3):
    data = generate(truth7, sample_configs(ranges3, 40, seed=12))
    spec_a = ModelSpec(S3, TERMS7, ResourceVector(S3, (1.0, 1.0, 1.0)))
    spec_b = spec_a.with_baseline(ResourceVector(S3, (16.0, 4.0, 8.0)))
    a, b = fit_dataset(spec_a, data), fit_dataset(spec_b, data)
    assert not np.allclose(a.coefficients_raw, b.coefficients_raw)
    probe = sample_configs(ranges3, 100, seed=13)
    np.testing.assert_allclose(a.inverse_scores(probe), b.inverse_scores(probe), rtol=1e-9)
