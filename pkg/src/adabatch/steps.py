"""Step-size policies: constant, accumulated-gradient adaptive, Armijo backtracking.

The adaptive rule is

    eta_t = alpha / (beta + sum_{i<t} ||g_{S_i}(w_i)||^2)^(1/2 + tau),

with alpha, beta > 0 and 0 <= tau < 1/2. The accumulator deliberately
excludes the current iteration's gradient; including it would bias the
update direction. Accumulate exactly once per iteration, after stepping.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BatchTooSmall, DegenerateGradient, LineSearchDiverged
from .objectives import Objective, PerSampleGradients, batch_value

CONSTANT = "constant"
ADAGRAD = "adagrad"
LINE_SEARCH = "line_search"
POLICIES = (CONSTANT, ADAGRAD, LINE_SEARCH)


@dataclass
class ConstantStep:
    eta: float

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError("constant step size must be non-negative")

    def step(self) -> float:
        return self.eta

    def accumulate(self, grad_norm_sq: float) -> None:
        pass


@dataclass
class AdaGradStep:
    """Accumulated-squared-gradient step rule with exponent 1/2 + tau."""

    alpha: float
    beta: float
    tau: float = 0.0
    accum: float = 0.0

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")
        if not 0.0 <= self.tau < 0.5:
            raise ValueError("tau must lie in [0, 1/2)")
        if self.accum < 0:
            raise ValueError("accumulator must be non-negative")

    def step(self) -> float:
        return self.alpha / (self.beta + self.accum) ** (0.5 + self.tau)

    def accumulate(self, grad_norm_sq: float) -> None:
        if grad_norm_sq < 0:
            raise ValueError("squared gradient norm must be non-negative")
        self.accum += grad_norm_sq


@dataclass
class LineSearchState:
    """Carries the last accepted curvature estimate between iterations."""

    l_prev: float = 1.0
    growth: float = 2.0
    max_iters: int = 60

    def __post_init__(self):
        if self.l_prev <= 0:
            raise ValueError("initial curvature estimate must be positive")
        if self.growth <= 1:
            raise ValueError("growth factor must exceed 1")


def line_search(obj: Objective, w: np.ndarray, batch, psg: PerSampleGradients,
                state: LineSearchState, grad_norm_floor: float = 1e-12):
    """Backtracking search for L with the sufficient-decrease condition

        f_S(w - g/L) <= f_S(w) - ||g||^2 / (2L),   g = batch gradient.

    The first trial shrinks the previous estimate by
    zeta = max(1, 2 / (SampleVar[grad_i] / (m ||g||^2) + 1)), then L grows
    geometrically until the condition holds. Returns (L, 1/L) and updates
    ``state``. The sample variance uses the Bessel factor 1/(m-1), so the
    batch must hold at least two samples.
    """
    m = psg.batch_size
    if m < 2:
        raise BatchTooSmall("line search needs at least two samples for the variance")
    g = psg.mean
    g2 = float(g @ g)
    if np.sqrt(g2) < grad_norm_floor:
        raise DegenerateGradient("zero batch gradient in line search")

    sample_var = psg.sum_sq_dev_total / (m - 1)
    a = sample_var / (m * g2) + 1.0
    zeta = max(1.0, 2.0 / a)
    L = state.l_prev / zeta

    f0 = batch_value(obj, w, batch)
    for _ in range(state.max_iters + 1):
        f_new = batch_value(obj, w - g / L, batch)
        if np.isfinite(f_new) and f_new <= f0 - g2 / (2.0 * L):
            state.l_prev = L
            return L, 1.0 / L
        L *= state.growth
    raise LineSearchDiverged(
        f"no sufficient decrease after {state.max_iters} growth steps (pathological batch)"
    )


def make_step_policy(policy: str, *, eta: float = 0.01, alpha: float = 1.0,
                     beta: float = 1.0, tau: float = 0.0):
    if policy == CONSTANT:
        return ConstantStep(eta)
    if policy == ADAGRAD:
        return AdaGradStep(alpha, beta, tau)
    raise ValueError(f"no scalar step policy named {policy!r}")
