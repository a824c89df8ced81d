"""The three benchmark objectives and their per-sample / batch / full gradients.

All three losses are empirical means over the dataset:

  least_squares   f_i(w) = 0.5 * (a_i^T w - b_i)^2           (regression data)
  logistic        f_i(w) = log(1 + exp(-y_i x_i^T w))        (labels in {-1,+1})
  nllsq           f_i(w) = (y_i - sigmoid(x_i^T w))^2        (labels in {0,1})

Batch gradients materialize the per-sample rows because the gradient-quality
tests are sums of per-sample statistics. Reductions use numpy's fixed
sequential order so identical inputs reproduce bit-identical results.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .data import KIND_BINARY01, KIND_BINARY_PM1, KIND_REGRESSION, Dataset
from .errors import EmptyBatch, IndexOutOfRange

LEAST_SQUARES = "least_squares"
LOGISTIC = "logistic"
NLLSQ = "nllsq"

_COMPATIBLE_DATA = {
    LEAST_SQUARES: KIND_REGRESSION,
    LOGISTIC: KIND_BINARY_PM1,
    NLLSQ: KIND_BINARY01,
}


def sigmoid(z):
    """Numerically stable logistic function.

    For z >= 0 uses 1/(1+exp(-z)); for z < 0 uses exp(z)/(1+exp(z)), which
    avoids overflow on large negative margins.
    """
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softplus(z):
    # log(1 + exp(z)) without overflow
    z = np.asarray(z, dtype=np.float64)
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


@dataclass(frozen=True)
class Objective:
    kind: str
    dataset: Dataset
    known_optimum: Optional[Tuple[np.ndarray, float]] = None

    @property
    def n_samples(self) -> int:
        return self.dataset.n_samples

    @property
    def n_features(self) -> int:
        return self.dataset.n_features


@dataclass(frozen=True)
class PerSampleGradients:
    """Per-sample gradient rows of one batch plus the test statistics.

    rows:             (m, d) matrix, row i = gradient of sample i at w.
    mean:             batch gradient, the arithmetic mean of rows.
    sum_sq_dev_inner: sum_i (rows_i . mean - ||mean||^2)^2.
    sum_sq_dev_orth:  sum_i || rows_i - (rows_i . mean / ||mean||^2) mean ||^2.
    sum_sq_dev_total: sum_i || rows_i - mean ||^2 (line search and norm-test policy).
    """

    rows: np.ndarray
    mean: np.ndarray
    sum_sq_dev_inner: float
    sum_sq_dev_orth: float
    sum_sq_dev_total: float

    @property
    def batch_size(self) -> int:
        return self.rows.shape[0]


def make_objective(kind: str, dataset: Dataset, fit_intercept: bool = False,
                   compute_optimum: bool = False) -> Objective:
    """Build an objective over ``dataset``, checking label compatibility.

    fit_intercept appends a constant-1 column (off by default).
    compute_optimum attaches (w*, f*): closed form for least squares, a long
    deterministic full-gradient reference run for logistic.
    """
    if kind not in _COMPATIBLE_DATA:
        raise ValueError(f"unknown objective kind {kind!r}")
    if dataset.kind != _COMPATIBLE_DATA[kind]:
        raise ValueError(
            f"objective {kind} needs {_COMPATIBLE_DATA[kind]} data, got {dataset.kind}"
        )
    if fit_intercept:
        ones = np.ones((dataset.n_samples, 1))
        dataset = Dataset(np.hstack([dataset.features, ones]), dataset.labels, dataset.kind)
    obj = Objective(kind, dataset)
    if compute_optimum:
        if kind == LEAST_SQUARES:
            obj = Objective(kind, dataset, least_squares_optimum(dataset))
        elif kind == LOGISTIC:
            obj = Objective(kind, dataset, logistic_reference_optimum(obj))
        # nllsq is non-convex; no trustworthy optimum is attached
    return obj


def _check_index(obj: Objective, i: int) -> None:
    if not 0 <= i < obj.n_samples:
        raise IndexOutOfRange(f"sample index {i} outside [0, {obj.n_samples})")


def sample_value(obj: Objective, w: np.ndarray, i: int) -> float:
    _check_index(obj, i)
    x = obj.dataset.features[i]
    y = obj.dataset.labels[i]
    z = float(x @ w)
    if obj.kind == LEAST_SQUARES:
        return 0.5 * (z - y) ** 2
    if obj.kind == LOGISTIC:
        return float(_softplus(-y * z))
    p = float(sigmoid(z))
    return (y - p) ** 2


def sample_gradient(obj: Objective, w: np.ndarray, i: int) -> np.ndarray:
    _check_index(obj, i)
    x = obj.dataset.features[i]
    y = obj.dataset.labels[i]
    z = float(x @ w)
    if obj.kind == LEAST_SQUARES:
        return (z - y) * x
    if obj.kind == LOGISTIC:
        return -y * float(sigmoid(-y * z)) * x
    p = float(sigmoid(z))
    return -2.0 * (y - p) * p * (1.0 - p) * x


def _batch_rows(obj: Objective, w: np.ndarray, batch: np.ndarray) -> np.ndarray:
    x = obj.dataset.features[batch]
    y = obj.dataset.labels[batch]
    z = x @ w
    if obj.kind == LEAST_SQUARES:
        coeff = z - y
    elif obj.kind == LOGISTIC:
        coeff = -y * sigmoid(-y * z)
    else:
        p = sigmoid(z)
        coeff = -2.0 * (y - p) * p * (1.0 - p)
    return x * coeff[:, None]


def batch_value(obj: Objective, w: np.ndarray, batch) -> float:
    """Mean loss over the batch, f_S(w)."""
    batch = np.asarray(batch, dtype=np.intp)
    if batch.size == 0:
        raise EmptyBatch("batch must be non-empty")
    x = obj.dataset.features[batch]
    y = obj.dataset.labels[batch]
    z = x @ w
    if obj.kind == LEAST_SQUARES:
        return float(np.mean(0.5 * (z - y) ** 2))
    if obj.kind == LOGISTIC:
        return float(np.mean(_softplus(-y * z)))
    return float(np.mean((y - sigmoid(z)) ** 2))


def stats_from_rows(rows: np.ndarray) -> PerSampleGradients:
    """Assemble the batch statistics from per-sample gradient rows.

    One pass; the orthogonal deviation is identically zero in one dimension
    (every gradient is parallel there).
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    mean = rows.mean(axis=0)
    g2 = float(mean @ mean)
    proj = rows @ mean
    sum_inner = float(np.sum((proj - g2) ** 2))
    diffs = rows - mean
    sum_total = float(np.sum(diffs * diffs))
    d = rows.shape[1]
    if d == 1 or g2 == 0.0:
        sum_orth = 0.0
    else:
        resid = rows - (proj / g2)[:, None] * mean
        sum_orth = float(np.sum(resid * resid))
    return PerSampleGradients(rows, mean, sum_inner, sum_orth, sum_total)


def batch_gradient(obj: Objective, w: np.ndarray, batch) -> PerSampleGradients:
    """Per-sample gradients over the batch with both deviation sums."""
    batch = np.asarray(batch, dtype=np.intp)
    if batch.size == 0:
        raise EmptyBatch("batch must be non-empty")
    return stats_from_rows(_batch_rows(obj, w, batch))


def full_value(obj: Objective, w: np.ndarray) -> float:
    return batch_value(obj, w, np.arange(obj.n_samples))


def full_gradient(obj: Objective, w: np.ndarray) -> np.ndarray:
    """Exact empirical-risk gradient over all N samples.

    Shares the batch reduction path, so an exhaustive batch_gradient call
    reproduces this bit for bit.
    """
    return _batch_rows(obj, w, np.arange(obj.n_samples)).mean(axis=0)


def dataset_gradient_variance(obj: Objective, w: np.ndarray) -> float:
    """Bessel-corrected total variance of per-sample gradients over the dataset."""
    rows = _batch_rows(obj, w, np.arange(obj.n_samples))
    diffs = rows - rows.mean(axis=0)
    n = obj.n_samples
    if n < 2:
        return 0.0
    return float(np.sum(diffs * diffs)) / (n - 1)


def least_squares_optimum(dataset: Dataset, ridge: float = 1e-12):
    """Normal-equation minimizer; the tiny ridge guards singular Gram matrices."""
    a = dataset.features
    b = dataset.labels
    n, d = a.shape
    gram = a.T @ a / n + ridge * np.eye(d)
    w = np.linalg.solve(gram, a.T @ b / n)
    f_star = float(np.mean(0.5 * (a @ w - b) ** 2))
    return w, f_star


def logistic_reference_optimum(obj: Objective, tol: float = 1e-10,
                               max_iters: int = 200_000):
    """Deterministic full-gradient descent with Armijo backtracking to ||grad|| <= tol."""
    w = np.zeros(obj.n_features)
    f = full_value(obj, w)
    step = 1.0
    for _ in range(max_iters):
        g = full_gradient(obj, w)
        g2 = float(g @ g)
        if np.sqrt(g2) <= tol:
            break
        step *= 2.0  # allow recovery after conservative iterations
        while True:
            w_new = w - step * g
            f_new = full_value(obj, w_new)
            if f_new <= f - 0.5 * step * g2:
                break
            step *= 0.5
            if step < 1e-20:
                raise RuntimeError("reference descent stalled")
        w, f = w_new, f_new
    return w, full_value(obj, w)


def lipschitz_upper(obj: Objective) -> Optional[float]:
    """Smoothness upper bound where cheap: lambda_max of the data Gram matrix
    for least squares, a quarter of it for logistic. None for the non-convex loss."""
    if obj.kind == NLLSQ:
        return None
    a = obj.dataset.features
    lam = float(np.linalg.eigvalsh(a.T @ a / obj.n_samples)[-1])
    return lam if obj.kind == LEAST_SQUARES else 0.25 * lam
