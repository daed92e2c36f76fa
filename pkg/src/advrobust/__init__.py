"""Adversarial robustness benchmarking for small image classifiers and segmenters."""

__version__ = "0.1.0"
