import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adabatch.data import Dataset, SyntheticSpec, generate_synthetic
from adabatch.errors import EmptyBatch, IndexOutOfRange
from adabatch.objectives import (LEAST_SQUARES, LOGISTIC, NLLSQ, batch_gradient,
                                 batch_value, dataset_gradient_variance,
                                 full_gradient, full_value,
                                 least_squares_optimum, lipschitz_upper,
                                 make_objective, sample_gradient, sample_value,
                                 sigmoid, stats_from_rows)
from conftest import demo_dataset


def finite_difference(obj, w, i, h=1e-6):
    d = len(w)
    grad = np.empty(d)
    for k in range(d):
        e = np.zeros(d)
        e[k] = h
        grad[k] = (sample_value(obj, w + e, i) - sample_value(obj, w - e, i)) / (2 * h)
    return grad


class TestSampleValues:
    def test_least_squares_interpolation(self):
        ds, w_star = generate_synthetic(SyntheticSpec(n_samples=30, n_features=4,
                                                      noise_std=0.0, seed=1))
        obj = make_objective(LEAST_SQUARES, ds)
        for i in range(ds.n_samples):
            assert sample_value(obj, w_star, i) == pytest.approx(0.0, abs=1e-18)

    def test_logistic_at_zero_is_log_two(self, small_logistic):
        w = np.zeros(small_logistic.n_features)
        for i in range(10):
            assert sample_value(small_logistic, w, i) == pytest.approx(math.log(2))

    def test_nllsq_zero_row(self):
        ds = Dataset(np.array([[0.0, 0.0]]), np.array([1.0]), kind="binary01")
        obj = make_objective(NLLSQ, ds)
        assert sample_value(obj, np.array([3.0, -2.0]), 0) == pytest.approx(0.25)

    def test_index_out_of_range(self, small_logistic):
        w = np.zeros(small_logistic.n_features)
        with pytest.raises(IndexOutOfRange):
            sample_value(small_logistic, w, small_logistic.n_samples)
        with pytest.raises(IndexOutOfRange):
            sample_gradient(small_logistic, w, -1)


class TestSampleGradients:
    def test_least_squares_basis_row(self):
        ds = Dataset(np.array([[1.0, 0.0]]), np.array([0.0]))
        obj = make_objective(LEAST_SQUARES, ds)
        g = sample_gradient(obj, np.array([0.5, 0.0]), 0)
        assert g.tolist() == [0.5, 0.0]

    def test_logistic_at_zero(self, small_logistic):
        w = np.zeros(small_logistic.n_features)
        for i in range(5):
            x = small_logistic.dataset.features[i]
            y = small_logistic.dataset.labels[i]
            assert np.allclose(sample_gradient(small_logistic, w, i), -0.5 * y * x)

    @pytest.mark.parametrize("kind", [LEAST_SQUARES, LOGISTIC, NLLSQ])
    def test_finite_difference_oracle(self, kind, ls_objective, small_logistic,
                                      small_nllsq):
        obj = {LEAST_SQUARES: ls_objective, LOGISTIC: small_logistic,
               NLLSQ: small_nllsq}[kind]
        rng = np.random.default_rng(42)
        for _ in range(20):
            w = 0.5 * rng.standard_normal(obj.n_features)
            i = int(rng.integers(obj.n_samples))
            analytic = sample_gradient(obj, w, i)
            numeric = finite_difference(obj, w, i)
            denom = np.linalg.norm(analytic) + np.linalg.norm(numeric) + 1e-12
            assert np.linalg.norm(analytic - numeric) / denom <= 1e-6


class TestBatchGradient:
    def test_single_sample(self, ls_objective):
        w = np.ones(ls_objective.n_features)
        psg = batch_gradient(ls_objective, w, [7])
        assert np.array_equal(psg.mean, psg.rows[0])
        assert psg.sum_sq_dev_inner == 0.0
        assert psg.sum_sq_dev_total == 0.0

    def test_demo_batch_statistics(self):
        # balanced two-point batch at w=0.5: mean 0.5, inner deviations +-0.5,
        # so the inner deviation sum is 20 * 0.25 = 5
        obj = make_objective(LEAST_SQUARES, demo_dataset(10))
        psg = batch_gradient(obj, np.array([0.5]), np.arange(20))
        assert psg.mean[0] == 0.5
        assert psg.sum_sq_dev_inner == pytest.approx(5.0, abs=1e-12)
        assert psg.sum_sq_dev_orth == 0.0
        assert psg.sum_sq_dev_total == pytest.approx(20.0, abs=1e-12)

    def test_exhaustive_batch_matches_full_gradient(self, ls_objective):
        w = np.full(ls_objective.n_features, 0.3)
        psg = batch_gradient(ls_objective, w, np.arange(ls_objective.n_samples))
        assert np.array_equal(psg.mean, full_gradient(ls_objective, w))

    def test_empty_batch(self, ls_objective):
        with pytest.raises(EmptyBatch):
            batch_gradient(ls_objective, np.zeros(ls_objective.n_features), [])
        with pytest.raises(EmptyBatch):
            batch_value(ls_objective, np.zeros(ls_objective.n_features), [])

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 12), st.integers(1, 5), st.integers(0, 2**32 - 1))
    def test_stats_match_bruteforce(self, m, d, seed):
        rng = np.random.default_rng(seed)
        rows = rng.standard_normal((m, d))
        psg = stats_from_rows(rows)
        mean = sum(rows[i] for i in range(m)) / m
        assert np.linalg.norm(psg.mean - mean) <= 1e-12 * (1 + np.linalg.norm(mean))
        g2 = mean @ mean
        inner = sum((rows[i] @ psg.mean - psg.mean @ psg.mean) ** 2 for i in range(m))
        assert psg.sum_sq_dev_inner == pytest.approx(inner, rel=1e-10, abs=1e-12)
        if d > 1 and g2 > 0:
            orth = sum(
                np.linalg.norm(rows[i] - (rows[i] @ psg.mean / (psg.mean @ psg.mean)) * psg.mean) ** 2
                for i in range(m)
            )
            assert psg.sum_sq_dev_orth == pytest.approx(orth, rel=1e-9, abs=1e-12)
        assert psg.sum_sq_dev_inner >= 0
        assert psg.sum_sq_dev_orth >= 0

    @settings(max_examples=25, deadline=None)
    @given(st.integers(2, 30), st.integers(0, 2**32 - 1))
    def test_one_dimension_kills_orth_deviation(self, m, seed):
        rng = np.random.default_rng(seed)
        psg = stats_from_rows(rng.standard_normal((m, 1)))
        assert psg.sum_sq_dev_orth == 0.0


class TestFullGradient:
    def test_normal_equation_stationarity(self, ls_objective):
        w_opt, _ = ls_objective.known_optimum
        g = full_gradient(ls_objective, w_opt)
        b_norm = np.linalg.norm(ls_objective.dataset.labels)
        assert np.linalg.norm(g) <= 1e-8 * (1.0 + b_norm)

    def test_logistic_closed_form_at_zero(self, small_logistic):
        x = small_logistic.dataset.features
        y = small_logistic.dataset.labels
        expected = -(x.T @ y) / (2 * small_logistic.n_samples)
        got = full_gradient(small_logistic, np.zeros(small_logistic.n_features))
        assert np.allclose(got, expected, rtol=1e-12, atol=1e-15)

    def test_smoothness_inequality_least_squares(self, ls_objective):
        # ||grad f(w)||^2 <= 2 L (f(w) - f*) with L the top Gram eigenvalue
        L = lipschitz_upper(ls_objective)
        _, f_star = ls_objective.known_optimum
        rng = np.random.default_rng(0)
        for _ in range(100):
            w = rng.standard_normal(ls_objective.n_features) * 3.0
            g2 = float(np.linalg.norm(full_gradient(ls_objective, w)) ** 2)
            gap = full_value(ls_objective, w) - f_star
            assert g2 <= 2.0 * L * gap * (1 + 1e-10) + 1e-12


class TestStatistics:
    def test_unbiasedness_montecarlo(self, ls_objective):
        rng = np.random.default_rng(1)
        n, d = ls_objective.n_samples, ls_objective.n_features
        w = rng.standard_normal(d)
        true = full_gradient(ls_objective, w)
        reps, m = 20_000, 4
        idx = rng.integers(0, n, size=(reps, m))
        rows = ls_objective.dataset.features[idx]
        resid = rows @ w - ls_objective.dataset.labels[idx]
        grads = np.einsum("rmd,rm->rd", rows, resid) / m
        se = grads.std(axis=0, ddof=1) / np.sqrt(reps)
        assert np.all(np.abs(grads.mean(axis=0) - true) <= 4.0 * se)

    def test_variance_shrinks_like_one_over_batch(self, ls_objective):
        rng = np.random.default_rng(2)
        n, d = ls_objective.n_samples, ls_objective.n_features
        w = rng.standard_normal(d) * 0.5
        true = full_gradient(ls_objective, w)
        reps = 4000
        mse = {}
        for m in (1, 4, 16):
            idx = rng.integers(0, n, size=(reps, m))
            rows = ls_objective.dataset.features[idx]
            resid = rows @ w - ls_objective.dataset.labels[idx]
            grads = np.einsum("rmd,rm->rd", rows, resid) / m
            mse[m] = float(np.mean(np.sum((grads - true) ** 2, axis=1)))
        for m in (4, 16):
            ratio = (mse[1] / m) / mse[m]
            assert 0.7 <= ratio <= 1.4

    def test_convexity_witnesses(self, ls_objective, small_logistic):
        rng = np.random.default_rng(3)
        for obj in (ls_objective, small_logistic):
            for _ in range(20):
                u = rng.standard_normal(obj.n_features)
                v = rng.standard_normal(obj.n_features)
                mid = full_value(obj, 0.5 * (u + v))
                avg = 0.5 * full_value(obj, u) + 0.5 * full_value(obj, v)
                assert mid <= avg + 1e-12

    def test_dataset_variance_definition(self, ls_objective):
        w = np.zeros(ls_objective.n_features)
        psg = batch_gradient(ls_objective, w, np.arange(ls_objective.n_samples))
        expected = psg.sum_sq_dev_total / (ls_objective.n_samples - 1)
        assert dataset_gradient_variance(ls_objective, w) == pytest.approx(expected)


class TestNumerics:
    def test_sigmoid_extremes(self):
        assert sigmoid(np.array([1000.0]))[0] == 1.0
        assert sigmoid(np.array([-1000.0]))[0] == 0.0
        assert sigmoid(np.array([0.0]))[0] == 0.5

    def test_logistic_large_margin_finite(self):
        ds = Dataset(np.array([[1000.0], [-1000.0]]), np.array([1.0, -1.0]),
                     kind="binaryPM1")
        obj = make_objective(LOGISTIC, ds)
        w = np.array([5.0])
        for i in range(2):
            assert np.isfinite(sample_value(obj, w, i))
            assert np.isfinite(sample_gradient(obj, w, i)).all()

    def test_incompatible_dataset_kind(self, ls_objective):
        with pytest.raises(ValueError):
            make_objective(LOGISTIC, ls_objective.dataset)

    def test_intercept_column(self, small_logistic):
        with_icpt = make_objective(LOGISTIC, small_logistic.dataset, fit_intercept=True)
        assert with_icpt.n_features == small_logistic.n_features + 1
        assert np.all(with_icpt.dataset.features[:, -1] == 1.0)
