#!/usr/bin/env python3
"""Write the binary-classification stand-in dataset used by the non-convex
norm-oracle preset to a LIBSVM file (labels in {0, 1}).

Usage: python scripts/make_nllsq_dataset.py [PATH]

The regression targets of the seeded generator are thresholded at zero, which
yields a noisy linear classification problem of 2000 samples x 100 features.
Pointing the preset at a local copy of a LIBSVM dataset (e.g. data/a9a) gives
the same experiment on real data; see configs/a9a_nllsq_norm_oracle.json.
"""
import sys

from adabatch.data import SyntheticSpec, generate_synthetic, threshold_labels, to_libsvm

SPEC = SyntheticSpec(n_samples=2000, n_features=100, noise_std=4.0, seed=13)


def write(path: str) -> None:
    dataset, _ = generate_synthetic(SPEC)
    binary = threshold_labels(dataset, "binary01")
    with open(path, "w") as fh:
        fh.write(to_libsvm(binary))
    print(f"wrote {path} ({binary.n_samples} x {binary.n_features})")


if __name__ == "__main__":
    write(sys.argv[1] if len(sys.argv) > 1 else "data/nllsq_standin.libsvm")
