import numpy as np
import pytest

from adabatch.data import Dataset, SyntheticSpec, generate_synthetic, threshold_labels
from adabatch.objectives import LEAST_SQUARES, LOGISTIC, NLLSQ, make_objective


@pytest.fixture(scope="session")
def synthetic():
    """The benchmark regression problem: N=1000, d=20, sigma=4."""
    dataset, w_star = generate_synthetic(SyntheticSpec(seed=3))
    return dataset, w_star


@pytest.fixture(scope="session")
def ls_objective(synthetic):
    dataset, _ = synthetic
    return make_objective(LEAST_SQUARES, dataset, compute_optimum=True)


@pytest.fixture(scope="session")
def small_logistic():
    dataset, _ = generate_synthetic(SyntheticSpec(n_samples=200, n_features=5, seed=11))
    return make_objective(LOGISTIC, threshold_labels(dataset, "binaryPM1"))


@pytest.fixture(scope="session")
def small_nllsq():
    dataset, _ = generate_synthetic(SyntheticSpec(n_samples=200, n_features=5, seed=12))
    return make_objective(NLLSQ, threshold_labels(dataset, "binary01"))


def demo_dataset(n_minus: int, total: int = 20) -> Dataset:
    """The 1-D two-point batch: n_minus samples with xi=-1, rest xi=+1."""
    labels = np.concatenate([-np.ones(n_minus), np.ones(total - n_minus)])
    return Dataset(np.ones((total, 1)), labels)


@pytest.fixture()
def balanced_demo():
    return make_objective(LEAST_SQUARES, demo_dataset(10))
