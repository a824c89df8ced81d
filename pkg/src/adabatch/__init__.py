"""Stochastic gradient descent with adaptive step sizes and adaptive batch
sizes governed by gradient-quality tests, plus a benchmark CLI."""

__version__ = "0.1.0"
