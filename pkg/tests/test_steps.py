import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adabatch.data import Dataset
from adabatch.errors import BatchTooSmall, DegenerateGradient, LineSearchDiverged
from adabatch.objectives import LEAST_SQUARES, batch_gradient, batch_value, make_objective
from adabatch.steps import AdaGradStep, ConstantStep, LineSearchState, line_search


def quadratic_objective(n_copies=2):
    """n identical samples of f_i(w) = 0.5 w^2 (a=1, b=0)."""
    return make_objective(
        LEAST_SQUARES,
        Dataset(np.ones((n_copies, 1)), np.zeros(n_copies)),
    )


class TestAdaGradStep:
    def test_forced_values(self):
        assert AdaGradStep(alpha=0.1, beta=100.0).step() == pytest.approx(0.01)
        assert AdaGradStep(alpha=1.0, beta=1.0, accum=125.0).step() == pytest.approx(1 / math.sqrt(126))
        assert AdaGradStep(alpha=2.0, beta=16.0, tau=0.25).step() == pytest.approx(0.25)

    def test_accumulation_sequence(self):
        step = AdaGradStep(alpha=1.0, beta=1.0)
        step.accumulate(100.0)
        step.accumulate(25.0)
        assert step.accum == 125.0
        assert step.step() == pytest.approx(1 / math.sqrt(126))

    def test_zero_accumulation_keeps_step(self):
        step = AdaGradStep(alpha=0.5, beta=4.0)
        before = step.step()
        step.accumulate(0.0)
        assert step.step() == before

    def test_validation(self):
        with pytest.raises(ValueError):
            AdaGradStep(alpha=0.0, beta=1.0)
        with pytest.raises(ValueError):
            AdaGradStep(alpha=1.0, beta=0.0)
        with pytest.raises(ValueError):
            AdaGradStep(alpha=1.0, beta=1.0, tau=0.5)
        with pytest.raises(ValueError):
            AdaGradStep(alpha=1.0, beta=1.0).accumulate(-1.0)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(0.0, 1e6), min_size=1, max_size=50),
           st.floats(0.01, 10), st.floats(0.01, 1e5),
           st.floats(0.0, 0.49))
    def test_monotone_non_increasing(self, norms, alpha, beta, tau):
        step = AdaGradStep(alpha=alpha, beta=beta, tau=tau)
        previous = math.inf
        for g2 in norms:
            eta = step.step()
            assert eta <= previous + 1e-18
            step.accumulate(g2)
            previous = eta

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.0, 1e4), st.floats(1e6, 1e12))
    def test_large_beta_first_order_bound(self, accum, beta):
        # tau = 0: relative deviation from alpha/sqrt(beta) <= G/(2 beta)
        alpha = 1.0
        eta = AdaGradStep(alpha=alpha, beta=beta, accum=accum).step()
        flat = alpha / math.sqrt(beta)
        assert abs(eta - flat) / flat <= accum / (2 * beta) + 1e-15


class TestConstantStep:
    def test_value_and_noop_accumulate(self):
        step = ConstantStep(0.1)
        step.accumulate(100.0)
        assert step.step() == 0.1

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            ConstantStep(-0.1)


class TestLineSearch:
    def test_quadratic_needs_one_growth(self):
        # zero-variance batch: a=1, zeta=2, trial L=0.5 fails the decrease
        # condition, one doubling reaches L=1, which is exact for f=0.5 w^2
        obj = quadratic_objective()
        w = np.array([1.0])
        psg = batch_gradient(obj, w, [0, 1])
        state = LineSearchState(l_prev=1.0, growth=2.0)
        L, eta = line_search(obj, w, [0, 1], psg, state)
        assert L == 1.0
        assert eta == 1.0
        assert state.l_prev == 1.0

    def test_armijo_at_trial_means_zero_growth(self):
        obj = quadratic_objective()
        w = np.array([1.0])
        psg = batch_gradient(obj, w, [0, 1])
        state = LineSearchState(l_prev=4.0, growth=2.0)
        L, _ = line_search(obj, w, [0, 1], psg, state)
        assert L == 2.0  # l_prev / zeta with zeta = 2

    def test_zero_gradient_is_degenerate(self):
        obj = quadratic_objective()
        w = np.array([0.0])
        psg = batch_gradient(obj, w, [0, 1])
        with pytest.raises(DegenerateGradient):
            line_search(obj, w, [0, 1], psg, LineSearchState())

    def test_single_sample_rejected(self):
        obj = quadratic_objective()
        w = np.array([1.0])
        psg = batch_gradient(obj, w, [0])
        with pytest.raises(BatchTooSmall):
            line_search(obj, w, [0], psg, LineSearchState())

    def test_exhausted_growth_budget(self):
        obj = quadratic_objective()
        w = np.array([1.0])
        psg = batch_gradient(obj, w, [0, 1])
        with pytest.raises(LineSearchDiverged):
            line_search(obj, w, [0, 1], psg,
                        LineSearchState(l_prev=1.0, growth=2.0, max_iters=0))

    def test_armijo_postcondition_random_batches(self, ls_objective):
        rng = np.random.default_rng(8)
        state = LineSearchState()
        for _ in range(25):
            w = rng.standard_normal(ls_objective.n_features)
            batch = rng.choice(ls_objective.n_samples, size=16, replace=False)
            psg = batch_gradient(ls_objective, w, batch)
            L, eta = line_search(ls_objective, w, batch, psg, state)
            g2 = float(psg.mean @ psg.mean)
            lhs = batch_value(ls_objective, w - eta * psg.mean, batch)
            rhs = batch_value(ls_objective, w, batch) - g2 / (2 * L)
            assert lhs <= rhs + 1e-12

    def test_state_validation(self):
        with pytest.raises(ValueError):
            LineSearchState(l_prev=0.0)
        with pytest.raises(ValueError):
            LineSearchState(growth=1.0)
