"""Worked demonstration of exact-vs-approximated inner-product test disagreement.

The toy problem is f_i(w) = 0.5 (w - xi_i)^2 with xi uniform on {-1, +1}, so

    grad f(w) = w,   grad f_i(w) = w - xi_i,   grad f_S(w) = w - 1 + 2n/|S|,

where n counts the xi = -1 samples in the batch. Sweeping n over 0..|S|
exposes batches whose realized gradient passes one test and fails the other.

The exact test is scored two ways, because the population form cannot depend
on n while the per-batch picture clearly does:

  empirical:  the realized batch gradient is plugged straight into the exact
              inequality, giving min theta = |g_S.g - ||g||^2| / ||g||^2;
  population: the true two-point distribution of grad_i at batch size |S|,
              a constant curve in n.

Rows are labelled against the empirical form: "positive" means the exact
test passes at theta_a, "truth" means g_S is an ascent-blocking direction
(g_S . g > 0). A false positive is a batch the test endorses although it
points the wrong way.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .batch_tests import TestConfig, approx_recommended_size, approx_tests
from .data import Dataset
from .errors import DegenerateGradient
from .objectives import LEAST_SQUARES, Objective, batch_gradient

INF_MARKER = "inf"
_RHS_TOLERANCE = 1e-300  # approximated RHS at or below this counts as zero


@dataclass(frozen=True)
class DemoSpec:
    w: float = 0.5
    batch_total: int = 20
    theta_a: float = 1.0

    def __post_init__(self):
        if self.batch_total < 2:
            raise ValueError("batch_total must be >= 2")
        if self.theta_a <= 0:
            raise ValueError("theta_a must be positive")


@dataclass(frozen=True)
class DemoRow:
    n: int
    grad_true: float
    grad_batch: float
    min_theta_exact: float
    min_theta_exact_population: float
    approx_pass: bool
    approx_size: float  # math.inf encodes the unbounded recommendation
    label: str


def demo_dataset(n_minus: int, batch_total: int) -> Dataset:
    """The realized batch as a least-squares dataset: a_i = 1, b_i = xi_i."""
    labels = np.concatenate([
        -np.ones(n_minus), np.ones(batch_total - n_minus),
    ])
    return Dataset(np.ones((batch_total, 1)), labels)


def demo_table(spec: DemoSpec) -> List[DemoRow]:
    size = spec.batch_total
    grad_true = spec.w
    g2 = grad_true**2
    cfg = TestConfig(theta=spec.theta_a, nu=1.0, omega=1.0)

    # population curve: grad_i in {w+1, w-1} with equal weight, constant in n
    pop_grads = np.array([[spec.w + 1.0], [spec.w - 1.0]])
    proj = pop_grads[:, 0] * grad_true
    var_proj = float(np.mean((proj - g2) ** 2))
    min_theta_pop = math.sqrt(var_proj / (size * g2**2))

    rows = []
    for n in range(size + 1):
        dataset = demo_dataset(n, size)
        objective = Objective(LEAST_SQUARES, dataset)
        psg = batch_gradient(objective, np.array([spec.w]), np.arange(size))
        grad_batch = float(psg.mean[0])

        min_theta = abs(grad_batch * grad_true - g2) / g2
        positive = min_theta <= spec.theta_a
        truth = grad_batch * grad_true > 0.0
        label = ("T" if positive == truth else "F") + ("P" if positive else "N")

        rhs = spec.theta_a**2 * float(psg.mean @ psg.mean) ** 2
        if rhs <= _RHS_TOLERANCE:
            # the recommendation blows up exactly where the batch gradient dies
            approx_pass = True  # 0 <= 0, vacuously
            approx_size = math.inf
        else:
            try:
                verdict = approx_tests(psg, cfg)
                approx_pass = verdict.inner_pass
            except DegenerateGradient:
                approx_pass = True
            approx_size = float(approx_recommended_size(psg, cfg))
        rows.append(DemoRow(n, grad_true, grad_batch, min_theta, min_theta_pop,
                            approx_pass, approx_size, label))
    return rows


def summarize(rows: List[DemoRow]) -> dict:
    labels = [r.label for r in rows]
    pass_ns = [r.n for r in rows if r.label in ("TP", "FP")]
    contiguous = (pass_ns == list(range(min(pass_ns), max(pass_ns) + 1))) if pass_ns else True
    return {
        "counts": {lab: labels.count(lab) for lab in ("TP", "TN", "FP", "FN")},
        "has_false_positive": "FP" in labels,
        "has_false_negative": "FN" in labels,
        "exact_pass_set": pass_ns,
        "exact_pass_contiguous": contiguous,
    }


def demo_emit(rows: List[DemoRow], fh: Optional[io.TextIOBase] = None) -> str:
    """CSV with one row per n; the unbounded recommendation is the sentinel 'inf'."""
    buf = io.StringIO()
    buf.write("n,grad_true,grad_batch,min_theta_exact,min_theta_exact_population,"
              "approx_pass,approx_size,label\n")
    for r in rows:
        size = INF_MARKER if math.isinf(r.approx_size) else format(r.approx_size, ".17g")
        buf.write(f"{r.n},{format(r.grad_true, '.17g')},{format(r.grad_batch, '.17g')},"
                  f"{format(r.min_theta_exact, '.17g')},"
                  f"{format(r.min_theta_exact_population, '.17g')},"
                  f"{int(r.approx_pass)},{size},{r.label}\n")
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text
