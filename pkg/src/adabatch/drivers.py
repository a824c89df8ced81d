"""Optimization drivers.

Four entry points share one sequential loop:

  run_sgd               fixed batch, constant or accumulated-gradient step
  run_adabatch          accumulated-gradient step + approximated-test batch growth
  run_adaptive_sampling backtracking line-search step + approximated-test batch growth
  run_norm_test_oracle  accumulated-gradient step, batch chosen so the exact
                        norm test holds at every iterate (ERM objectives only)

Every iteration: draw a batch, compute per-sample gradients at w_t, pick the
step size, update, then (policy permitting) judge the just-used gradients and
grow the next batch. The adaptive step accumulator is fed strictly after the
step, so eta_t never sees the current gradient. Batch growth is clamped to
next = min(cap, max(current, recommendation)) unless allow_shrink is set.

A non-finite iterate or an exhausted line search terminates the run with the
corresponding status; the trace up to the failure is preserved. These are
reportable outcomes, not crashes.
"""

from __future__ import annotations

import time
from typing import Optional

import numpy as np

from . import __version__
from .batch_tests import TestConfig, TestVerdict, approx_tests
from .config import (BATCH_APPROX_TESTS, BATCH_FIXED, BATCH_NORM_ORACLE,
                     RunConfig)
from .errors import ConfigError, DegenerateGradient, LineSearchDiverged
from .objectives import (Objective, batch_gradient, dataset_gradient_variance,
                         full_gradient, full_value, lipschitz_upper)
from .sampling import BatchSampler
from .steps import (ADAGRAD, CONSTANT, LINE_SEARCH, AdaGradStep, ConstantStep,
                    LineSearchState, line_search)
from .traces import (STATUS_BUDGET, STATUS_CAP, STATUS_CONVERGED,
                     STATUS_LS_DIVERGED, STATUS_NONFINITE, STATUS_RUNNING,
                     RunTrace, TraceRow)


def _build_header(objective: Objective, config: RunConfig) -> dict:
    header = {
        "name": config.name,
        "version": __version__,
        "seed": config.seed,
        "objective": objective.kind,
        "dataset": {
            "n_samples": objective.n_samples,
            "n_features": objective.n_features,
            "kind": objective.dataset.kind,
        },
        "config": config.to_dict(),
    }
    # The convergence theory ties alpha, beta to the unknown smoothness
    # constant; log whether the bound holds when an estimate is cheap,
    # never enforce it.
    if config.step_policy == ADAGRAD:
        L = lipschitz_upper(objective)
        if L is not None:
            beta_pow = config.beta ** (0.5 + config.tau)
            header["step_constraint"] = {
                "lipschitz_upper": L,
                "two_alpha_L": 2.0 * config.alpha * L,
                "beta_pow": beta_pow,
                "holds": bool(2.0 * config.alpha * L < beta_pow),
            }
    return header


def next_batch_size(current: int, recommendation: int, cap: int,
                    allow_shrink: bool = False) -> int:
    """Clamp a test recommendation: never exceed the cap, and by default never
    shrink, which keeps |S_t| monotone and traces stable."""
    size = recommendation if allow_shrink else max(current, recommendation)
    return max(1, min(cap, size))


class _Recorder:
    """Accumulates trace rows; full-objective stats only when a row is cut."""

    def __init__(self, objective, config, header):
        self.objective = objective
        self.trace = RunTrace(header)
        self.every = config.trace_every

    def due(self, t: int) -> bool:
        return t == 1 or t % self.every == 0

    def emit(self, t, samples, n, w, grad_norm_batch, eta, m,
             verdict: Optional[TestVerdict], status: str) -> None:
        rows = self.trace.rows
        if rows and rows[-1].iteration == t:
            rows.pop()  # terminal row replaces the running row of the same iteration
        f = full_value(self.objective, w)
        gfull = float(np.linalg.norm(full_gradient(self.objective, w)))
        rows.append(TraceRow(
            iteration=t, samples=samples, epoch=samples / n, f=f,
            grad_norm_full=gfull, grad_norm_batch=grad_norm_batch,
            step_size=eta, batch_size=m,
            inner_lhs=verdict.lhs_inner if verdict else None,
            inner_rhs=verdict.rhs_inner if verdict else None,
            orth_lhs=verdict.lhs_orth if verdict else None,
            orth_rhs=verdict.rhs_orth if verdict else None,
            status=status, wall_nanos=time.perf_counter_ns(),
        ))


def _drive(objective: Objective, config: RunConfig) -> RunTrace:
    # overflow on a diverging run is an expected, recorded outcome; let inf
    # propagate silently into the non-finite check instead of warning
    with np.errstate(over="ignore", invalid="ignore"):
        return _drive_inner(objective, config)


def _drive_inner(objective: Objective, config: RunConfig) -> RunTrace:
    config.validate()
    n = objective.n_samples
    cap = min(config.batch_cap or n, n) if config.sampler_mode == "without_replacement" \
        else (config.batch_cap or n)
    sampler = BatchSampler(config.seed, n, config.sampler_mode)
    tests_cfg = TestConfig(config.theta, config.nu, config.omega, config.grad_norm_floor)

    if config.step_policy == CONSTANT:
        step = ConstantStep(config.eta)
    elif config.step_policy == ADAGRAD:
        step = AdaGradStep(config.alpha, config.beta, config.tau)
    else:
        step = None  # line search carries its own state
    ls_state = LineSearchState(config.ls_initial, config.ls_growth, config.ls_max_iters)

    recorder = _Recorder(objective, config, _build_header(objective, config))
    if config.w0 is not None:
        w = np.asarray(config.w0, dtype=np.float64)
        if w.shape != (objective.n_features,):
            raise ConfigError(f"{config.name}.w0: expected {objective.n_features} entries")
    else:
        w = np.zeros(objective.n_features)
    m = min(config.initial_batch, cap)
    samples = 0
    t = 0
    last = dict(grad_norm_batch=None, eta=None, verdict=None, batch=m)

    def stop(status: str) -> RunTrace:
        recorder.emit(t, samples, n, w, last["grad_norm_batch"],
                      last["eta"], last["batch"], last["verdict"], status)
        recorder.trace.header["final_status"] = status
        recorder.trace.final_weights = w.copy()
        return recorder.trace

    while True:
        if config.max_iterations is not None and t >= config.max_iterations:
            return stop(STATUS_BUDGET)
        if config.max_epochs is not None and samples >= config.max_epochs * n:
            return stop(STATUS_BUDGET)
        t += 1

        if config.batch_policy == BATCH_NORM_ORACLE:
            g_true = full_gradient(objective, w)
            g_true_sq = float(g_true @ g_true)
            if np.sqrt(g_true_sq) < config.grad_norm_floor:
                t -= 1
                return stop(STATUS_CONVERGED)
            variance = dataset_gradient_variance(objective, w)
            bound = config.omega**2 * g_true_sq
            while variance / m > bound and m < cap:
                m = min(2 * m, cap)
            if variance / m > bound:
                t -= 1
                return stop(STATUS_CAP)

        m_used = m
        batch = sampler.draw(m_used)
        psg = batch_gradient(objective, w, batch)
        g_batch_sq = float(psg.mean @ psg.mean)
        g_batch = float(np.sqrt(g_batch_sq))

        if config.step_policy == LINE_SEARCH:
            try:
                _, eta = line_search(objective, w, batch, psg, ls_state,
                                     config.grad_norm_floor)
            except DegenerateGradient:
                last.update(grad_norm_batch=g_batch, eta=None, verdict=None,
                            batch=m_used)
                return stop(STATUS_CONVERGED)
            except LineSearchDiverged:
                last.update(grad_norm_batch=g_batch, eta=None, verdict=None,
                            batch=m_used)
                return stop(STATUS_LS_DIVERGED)
        else:
            eta = step.step()

        w_next = w - eta * psg.mean
        samples += m_used
        if config.step_policy == ADAGRAD:
            step.accumulate(g_batch_sq)

        verdict = None
        if config.batch_policy == BATCH_APPROX_TESTS:
            try:
                verdict = approx_tests(psg, tests_cfg)
            except DegenerateGradient:
                last.update(grad_norm_batch=g_batch, eta=eta, verdict=None,
                            batch=m_used)
                return stop(STATUS_CONVERGED)
            if not verdict.passed:
                m = next_batch_size(m, verdict.recommended_size, cap,
                                    config.allow_shrink)

        last.update(grad_norm_batch=g_batch, eta=eta, verdict=verdict,
                    batch=m_used)

        if not np.isfinite(w_next).all():
            # keep w at the last finite point so the terminal row is meaningful
            return stop(STATUS_NONFINITE)
        w = w_next

        if recorder.due(t):
            recorder.emit(t, samples, n, w, g_batch, eta, m_used, verdict,
                          STATUS_RUNNING)
        if g_batch < config.stop_grad_norm:
            return stop(STATUS_CONVERGED)


def run(objective: Objective, config: RunConfig) -> RunTrace:
    """Run whatever policy combination the config asks for."""
    if config.step_policy == LINE_SEARCH and config.batch_policy == BATCH_NORM_ORACLE:
        raise ConfigError("line search is not combined with the norm-test oracle")
    return _drive(objective, config)


def run_sgd(objective: Objective, config: RunConfig) -> RunTrace:
    """Plain batched SGD: w <- w - eta_t * g_S, fixed batch size."""
    if config.batch_policy != BATCH_FIXED:
        raise ConfigError("run_sgd expects the fixed batch policy")
    if config.step_policy not in (CONSTANT, ADAGRAD):
        raise ConfigError("run_sgd expects a constant or adagrad step")
    return _drive(objective, config)


def run_adabatch(objective: Objective, config: RunConfig) -> RunTrace:
    """Adaptive step and adaptive batch: accumulated-gradient step sizes with
    approximated-test-driven batch growth."""
    if config.step_policy != ADAGRAD or config.batch_policy != BATCH_APPROX_TESTS:
        raise ConfigError("run_adabatch expects adagrad step + approx_tests batch")
    return _drive(objective, config)


def run_adaptive_sampling(objective: Objective, config: RunConfig) -> RunTrace:
    """Line-search step with approximated-test batch growth (the baseline
    whose divergence under test inconsistency is a first-class outcome)."""
    if config.step_policy != LINE_SEARCH or config.batch_policy != BATCH_APPROX_TESTS:
        raise ConfigError("run_adaptive_sampling expects line_search + approx_tests")
    return _drive(objective, config)


def run_norm_test_oracle(objective: Objective, config: RunConfig) -> RunTrace:
    """At each iterate pick the smallest batch (doubling from the current one)
    whose exact norm-test statistic passes, then take the adaptive step."""
    if config.batch_policy != BATCH_NORM_ORACLE:
        raise ConfigError("run_norm_test_oracle expects the exact_norm_oracle policy")
    if config.step_policy not in (CONSTANT, ADAGRAD):
        raise ConfigError("run_norm_test_oracle expects a constant or adagrad step")
    return _drive(objective, config)
