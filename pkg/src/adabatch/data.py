"""Datasets: LIBSVM parsing, serialization, and the seeded synthetic generator.

Everything is dense float64. Sparse LIBSVM rows are densified at load time;
at desk scale the three analytic objectives all have dense gradients in w,
so sparse kernels would buy nothing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, Iterable, Optional, Union

import numpy as np

from .errors import DimensionExceeded, EmptyDataset, MalformedLine

KIND_REGRESSION = "regression"
KIND_BINARY01 = "binary01"
KIND_BINARY_PM1 = "binaryPM1"
KINDS = (KIND_REGRESSION, KIND_BINARY01, KIND_BINARY_PM1)


@dataclass(frozen=True)
class Dataset:
    """Immutable sample matrix plus labels.

    features: (N, d) float64 matrix, one row per sample.
    labels:   (N,) float64 vector.
    kind:     one of ``regression``, ``binary01``, ``binaryPM1``.
    """

    features: np.ndarray
    labels: np.ndarray
    kind: str = KIND_REGRESSION

    def __post_init__(self):
        features = np.ascontiguousarray(self.features, dtype=np.float64)
        labels = np.ascontiguousarray(self.labels, dtype=np.float64)
        if features.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if labels.ndim != 1 or labels.shape[0] != features.shape[0]:
            raise ValueError("labels length must equal the number of feature rows")
        if features.shape[0] < 1 or features.shape[1] < 1:
            raise ValueError("dataset needs at least one sample and one feature")
        if not np.isfinite(features).all() or not np.isfinite(labels).all():
            raise ValueError("dataset entries must be finite")
        if self.kind not in KINDS:
            raise ValueError(f"unknown dataset kind {self.kind!r}")
        if self.kind == KIND_BINARY_PM1 and not np.isin(labels, (-1.0, 1.0)).all():
            raise ValueError("binaryPM1 labels must lie in {-1, +1}")
        if self.kind == KIND_BINARY01 and not np.isin(labels, (0.0, 1.0)).all():
            raise ValueError("binary01 labels must lie in {0, 1}")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        self.features.setflags(write=False)
        self.labels.setflags(write=False)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, indices) -> "Dataset":
        return Dataset(self.features[indices], self.labels[indices], self.kind)


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of the seeded linear-regression generator."""

    n_samples: int = 1000
    n_features: int = 20
    noise_std: float = 4.0
    seed: int = 0

    def __post_init__(self):
        if self.n_samples < 1 or self.n_features < 1:
            raise ValueError("n_samples and n_features must be positive")
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")


def _remap_labels(labels: np.ndarray, convention: str, line_nos) -> np.ndarray:
    if convention == KIND_REGRESSION:
        return labels
    values = set(np.unique(labels))
    if convention == KIND_BINARY_PM1:
        if values <= {-1.0, 1.0}:
            return labels
        if values <= {0.0, 1.0}:
            return np.where(labels == 0.0, -1.0, 1.0)
    elif convention == KIND_BINARY01:
        if values <= {0.0, 1.0}:
            return labels
        if values <= {-1.0, 1.0}:
            return np.where(labels == -1.0, 0.0, 1.0)
    bad = values - {-1.0, 0.0, 1.0}
    offender = sorted(bad)[0] if bad else sorted(values)[0]
    idx = int(np.nonzero(labels == offender)[0][0])
    raise MalformedLine(line_nos[idx], f"label {offender} not usable as {convention}")


def parse_libsvm(
    source: Union[str, IO[str], Iterable[str]],
    expected_dim: Optional[int] = None,
    label_convention: str = KIND_REGRESSION,
) -> Dataset:
    """Parse LIBSVM text ("label idx:val idx:val ...") into a dense Dataset.

    Feature indices are 1-based and must be strictly increasing within a line.
    Blank lines and '#' comments are skipped. The width is the maximum index
    seen unless ``expected_dim`` pins it. Labels are remapped to the requested
    convention ({-1,+1} for logistic, {0,1} for the squared sigmoid loss).
    """
    if label_convention not in KINDS:
        raise ValueError(f"unknown label convention {label_convention!r}")
    lines = source.splitlines() if isinstance(source, str) else source

    rows = []  # (line_no, label, [(idx0, value), ...])
    max_index = 0
    for line_no, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            label = float(tokens[0])
        except ValueError:
            raise MalformedLine(line_no, f"label token {tokens[0]!r} is not numeric")
        prev = 0
        pairs = []
        for token in tokens[1:]:
            idx_s, _, val_s = token.partition(":")
            try:
                idx = int(idx_s)
                value = float(val_s)
            except ValueError:
                raise MalformedLine(line_no, f"bad feature token {token!r}")
            if idx <= prev:
                raise MalformedLine(
                    line_no, f"feature index {idx} not strictly increasing"
                )
            if expected_dim is not None and idx > expected_dim:
                raise DimensionExceeded(line_no, idx, expected_dim)
            prev = idx
            pairs.append((idx - 1, value))
        max_index = max(max_index, prev)
        rows.append((line_no, label, pairs))

    if not rows:
        raise EmptyDataset("no samples parsed")
    dim = expected_dim if expected_dim is not None else max_index
    if dim < 1:
        raise EmptyDataset("no feature indices present and no expected_dim given")

    features = np.zeros((len(rows), dim), dtype=np.float64)
    labels = np.empty(len(rows), dtype=np.float64)
    line_nos = []
    for r, (line_no, label, pairs) in enumerate(rows):
        labels[r] = label
        line_nos.append(line_no)
        for idx0, value in pairs:
            features[r, idx0] = value
    labels = _remap_labels(labels, label_convention, line_nos)
    return Dataset(features, labels, kind=label_convention)


def to_libsvm(dataset: Dataset) -> str:
    """Serialize a Dataset back to LIBSVM text (zeros omitted, full precision)."""
    out = []
    for row, label in zip(dataset.features, dataset.labels):
        nz = np.nonzero(row)[0]
        parts = [format(label, ".17g")]
        parts.extend(f"{i + 1}:{format(row[i], '.17g')}" for i in nz)
        out.append(" ".join(parts))
    return "\n".join(out) + "\n"


def generate_synthetic(spec: SyntheticSpec):
    """Draw the seeded linear-regression problem b_i = a_i^T w* + noise.

    Rows a_i and the planted weights w* are i.i.d. standard normal; the noise
    is N(0, noise_std^2). PCG64 seeded with spec.seed, so output is
    bit-reproducible across platforms. Returns (Dataset, w_star).
    """
    rng = np.random.default_rng(spec.seed)
    a = rng.standard_normal((spec.n_samples, spec.n_features))
    w_star = rng.standard_normal(spec.n_features)
    noise = rng.standard_normal(spec.n_samples) * spec.noise_std
    b = a @ w_star + noise
    return Dataset(a, b, kind=KIND_REGRESSION), w_star


def synthetic_sidecar(spec: SyntheticSpec, w_star: np.ndarray, dataset: Dataset) -> dict:
    """Metadata written next to a generated LIBSVM file."""
    residuals = dataset.labels - dataset.features @ w_star
    return {
        "seed": spec.seed,
        "sigma": spec.noise_std,
        "n_samples": spec.n_samples,
        "n_features": spec.n_features,
        "w_star": [float(v) for v in w_star],
        "residual_check": float(np.max(np.abs(residuals))) if spec.noise_std == 0 else None,
    }


def write_synthetic(spec: SyntheticSpec, path: str) -> None:
    """Write <path> in LIBSVM format plus a <path>.json sidecar."""
    dataset, w_star = generate_synthetic(spec)
    with open(path, "w") as fh:
        fh.write(to_libsvm(dataset))
    with open(path + ".json", "w") as fh:
        json.dump(synthetic_sidecar(spec, w_star, dataset), fh, indent=2)


def threshold_labels(dataset: Dataset, kind: str = KIND_BINARY01, threshold: float = 0.0) -> Dataset:
    """Turn regression targets into binary labels by thresholding.

    Convenience for building classification problems out of the seeded
    generator when no LIBSVM file is at hand.
    """
    if kind == KIND_BINARY01:
        labels = (dataset.labels > threshold).astype(np.float64)
    elif kind == KIND_BINARY_PM1:
        labels = np.where(dataset.labels > threshold, 1.0, -1.0)
    else:
        raise ValueError("kind must be a binary label convention")
    return Dataset(dataset.features, labels, kind=kind)


def standardize(dataset: Dataset) -> Dataset:
    """Per-column standardization (mean 0, std 1); constant columns are left centered."""
    mu = dataset.features.mean(axis=0)
    sd = dataset.features.std(axis=0)
    sd = np.where(sd < 1e-12, 1.0, sd)
    return Dataset((dataset.features - mu) / sd, dataset.labels, dataset.kind)
