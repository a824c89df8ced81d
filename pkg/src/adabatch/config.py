"""Dataclass configs for runs and experiments, with JSON round-tripping.

Config files are plain JSON; parse -> serialize -> parse is the identity on
every valid file. Validation errors carry the offending field path.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from typing import List, Optional

from . import data as data_mod
from . import objectives as obj_mod
from .errors import ConfigError
from .sampling import MODES, WITHOUT_REPLACEMENT
from .steps import ADAGRAD, CONSTANT, LINE_SEARCH

BATCH_FIXED = "fixed"
BATCH_APPROX_TESTS = "approx_tests"
BATCH_NORM_ORACLE = "exact_norm_oracle"
BATCH_POLICIES = (BATCH_FIXED, BATCH_APPROX_TESTS, BATCH_NORM_ORACLE)


@dataclass
class RunConfig:
    """Everything one optimizer run needs besides the objective itself."""

    name: str = "run"
    step_policy: str = ADAGRAD
    batch_policy: str = BATCH_FIXED
    eta: float = 0.01            # constant policy
    alpha: float = 1.0           # adaptive policy
    beta: float = 1.0
    tau: float = 0.0
    ls_initial: float = 1.0      # line-search policy
    ls_growth: float = 2.0
    ls_max_iters: int = 60
    initial_batch: int = 2
    batch_cap: Optional[int] = None      # None means the dataset size
    allow_shrink: bool = False
    theta: float = 1.5
    nu: float = 7.0
    omega: float = 1.0
    grad_norm_floor: float = 1e-12
    seed: int = 0
    sampler_mode: str = WITHOUT_REPLACEMENT
    max_iterations: Optional[int] = None
    max_epochs: Optional[float] = 50.0
    stop_grad_norm: float = 1e-12
    trace_every: int = 10
    w0: Optional[List[float]] = None     # initial weights, zeros when omitted

    def validate(self, path: str = "run") -> None:
        def bad(fieldname, msg):
            raise ConfigError(f"{path}.{fieldname}: {msg}")

        if self.step_policy not in (CONSTANT, ADAGRAD, LINE_SEARCH):
            bad("step_policy", f"unknown policy {self.step_policy!r}")
        if self.batch_policy not in BATCH_POLICIES:
            bad("batch_policy", f"unknown policy {self.batch_policy!r}")
        if self.step_policy == CONSTANT and self.eta < 0:
            bad("eta", "must be non-negative")
        if self.step_policy == ADAGRAD:
            if self.alpha <= 0 or self.beta <= 0:
                bad("alpha", "alpha and beta must be positive")
            if not 0.0 <= self.tau < 0.5:
                bad("tau", "must lie in [0, 1/2)")
        if self.initial_batch < 1:
            bad("initial_batch", "must be >= 1")
        if self.batch_policy == BATCH_APPROX_TESTS and self.initial_batch < 2:
            bad("initial_batch", "approximated tests need |S| >= 2")
        if self.step_policy == LINE_SEARCH and self.initial_batch < 2:
            bad("initial_batch", "line search needs |S| >= 2 for the variance term")
        if self.batch_cap is not None and self.batch_cap < self.initial_batch:
            bad("batch_cap", "must be >= initial_batch")
        if self.theta <= 0 or self.nu <= 0 or self.omega <= 0:
            bad("theta", "test thresholds must be positive")
        if self.sampler_mode not in MODES:
            bad("sampler_mode", f"unknown mode {self.sampler_mode!r}")
        if self.max_iterations is None and self.max_epochs is None:
            bad("max_iterations", "need at least one of max_iterations / max_epochs")
        if self.trace_every < 1:
            bad("trace_every", "must be >= 1")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, raw: dict, path: str = "run") -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"{path}.{sorted(unknown)[0]}: unknown field")
        cfg = cls(**raw)
        cfg.validate(path)
        return cfg


@dataclass
class DataSourceConfig:
    """Where samples come from: the seeded generator or a LIBSVM file."""

    type: str = "synthetic"      # synthetic | libsvm
    n_samples: int = 1000
    n_features: int = 20
    noise_std: float = 4.0
    seed: int = 0
    path: Optional[str] = None
    expected_dim: Optional[int] = None
    standardize: bool = False
    max_rows: Optional[int] = None   # keep only the first rows of a LIBSVM file

    def validate(self, path: str = "dataset") -> None:
        if self.type not in ("synthetic", "libsvm"):
            raise ConfigError(f"{path}.type: unknown source {self.type!r}")
        if self.type == "libsvm" and not self.path:
            raise ConfigError(f"{path}.path: required for libsvm sources")
        if self.type == "synthetic":
            if self.n_samples < 1 or self.n_features < 1:
                raise ConfigError(f"{path}.n_samples: must be positive")
            if self.noise_std < 0:
                raise ConfigError(f"{path}.noise_std: must be non-negative")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, raw: dict, path: str = "dataset") -> "DataSourceConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"{path}.{sorted(unknown)[0]}: unknown field")
        cfg = cls(**raw)
        cfg.validate(path)
        return cfg


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    objective: str = obj_mod.LEAST_SQUARES
    fit_intercept: bool = False
    dataset: DataSourceConfig = field(default_factory=DataSourceConfig)
    runs: List[RunConfig] = field(default_factory=list)
    seeds: List[int] = field(default_factory=lambda: [0])
    out_dir: Optional[str] = None
    emit: List[str] = field(default_factory=lambda: ["csv", "json"])

    def validate(self) -> None:
        if self.objective not in (obj_mod.LEAST_SQUARES, obj_mod.LOGISTIC, obj_mod.NLLSQ):
            raise ConfigError(f"objective: unknown kind {self.objective!r}")
        self.dataset.validate("dataset")
        if not self.runs:
            raise ConfigError("runs: need at least one run")
        names = [r.name for r in self.runs]
        if len(set(names)) != len(names):
            raise ConfigError("runs: run names must be unique")
        for i, run in enumerate(self.runs):
            run.validate(f"runs[{i}]")
        if not self.seeds:
            raise ConfigError("seeds: need at least one seed")
        for fmt in self.emit:
            if fmt not in ("csv", "json"):
                raise ConfigError(f"emit: unknown format {fmt!r}")

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"{sorted(unknown)[0]}: unknown field")
        raw = dict(raw)
        dataset = DataSourceConfig.from_dict(raw.pop("dataset", {}))
        runs = [RunConfig.from_dict(r, f"runs[{i}]")
                for i, r in enumerate(raw.pop("runs", []))]
        cfg = cls(dataset=dataset, runs=runs, **raw)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")
        return cls.from_dict(raw)

    @classmethod
    def load(cls, path: str) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_json(fh.read())


def load_dataset(source: DataSourceConfig, objective_kind: str) -> data_mod.Dataset:
    """Materialize the dataset a given objective needs.

    Synthetic sources produce regression targets; for the classification
    losses the targets are thresholded at zero into the requested label
    convention, which yields a noisy linear classification problem.
    """
    required = {
        obj_mod.LEAST_SQUARES: data_mod.KIND_REGRESSION,
        obj_mod.LOGISTIC: data_mod.KIND_BINARY_PM1,
        obj_mod.NLLSQ: data_mod.KIND_BINARY01,
    }[objective_kind]
    if source.type == "synthetic":
        spec = data_mod.SyntheticSpec(source.n_samples, source.n_features,
                                      source.noise_std, source.seed)
        dataset, _ = data_mod.generate_synthetic(spec)
        if required != data_mod.KIND_REGRESSION:
            dataset = data_mod.threshold_labels(dataset, required)
    else:
        with open(source.path) as fh:
            dataset = data_mod.parse_libsvm(fh, source.expected_dim, required)
        if source.max_rows is not None and dataset.n_samples > source.max_rows:
            dataset = dataset.subset(range(source.max_rows))
    if source.standardize:
        dataset = data_mod.standardize(dataset)
    return dataset
